// Batch front end for the topic-detection pipeline: title cleaning, corpus
// building, training, tagging and evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topics/corpus.hpp"
#include "topics/eval.hpp"
#include "topics/gazetteer.hpp"
#include "topics/tagger.hpp"
#include "topics/text.hpp"
#include "topics/tokenizer.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitModel = 3;
constexpr int kExitAlignment = 4;

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Key = value configuration with '#' comments. Flags override file values.
struct PipelineConfig {
  std::map<std::string, std::string> kv;

  static PipelineConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path);
    PipelineConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (!key.empty()) cfg.kv[key] = value;
    }
    return cfg;
  }

  std::string str(const std::string& key, const std::string& fallback = "") const {
    auto it = kv.find(key);
    return it == kv.end() || it->second.empty() ? fallback : it->second;
  }
  std::string required(const std::string& key) const {
    const std::string v = str(key);
    if (v.empty()) throw input_error("config is missing required key: " + key);
    return v;
  }
  double num(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    return it == kv.end() || it->second.empty() ? fallback : std::stod(it->second);
  }
  int integer(const std::string& key, int fallback) const {
    auto it = kv.find(key);
    return it == kv.end() || it->second.empty() ? fallback : std::stoi(it->second);
  }
  bool flag(const std::string& key, bool fallback) const {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) return fallback;
    return it->second == "true" || it->second == "1" || it->second == "yes";
  }
  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) const {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) return fallback;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(std::stoi(item));
    }
    if (out.empty()) throw input_error("config key " + key + " has no values");
    return out;
  }
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::set<std::string> read_word_set(const std::string& path) {
  std::set<std::string> out;
  for (auto& line : read_lines(path)) out.insert(topics::normalize_phrase(line));
  return out;
}

std::vector<topics::Document> read_documents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open documents file: " + path);
  std::vector<topics::Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    docs.push_back(topics::Document::make(j.at("id"), j.at("text")));
  }
  if (docs.empty()) throw input_error("documents file is empty: " + path);
  return docs;
}

topics::CleaningConfig cleaning_config(const PipelineConfig& cfg) {
  topics::CleaningConfig cc = topics::CleaningConfig::defaults();
  const std::string stoplist = cfg.str("stoplist");
  if (!stoplist.empty()) cc.common_words = read_word_set(stoplist);
  const std::string locations = cfg.str("locations");
  if (!locations.empty()) cc.location_whitelist = read_word_set(locations);
  cc.remove_any_numeric_token = cfg.flag("numeric_any_token", false);
  cc.keep_min_words = cfg.integer("keep_min_words", 1);
  cc.keep_max_words = cfg.integer("keep_max_words", 5);
  return cc;
}

topics::TrainConfig train_config(const PipelineConfig& cfg, std::uint64_t seed) {
  topics::TrainConfig tc;
  tc.learning_rate = static_cast<float>(cfg.num("learning_rate", 0.05));
  tc.batch_size = cfg.integer("batch_size", 32);
  tc.max_epochs = cfg.integer("max_epochs", 16);
  tc.precision_stop = static_cast<float>(cfg.num("precision_stop", 0.70));
  tc.recall_stop = static_cast<float>(cfg.num("recall_stop", 0.90));
  tc.eval_fraction = static_cast<float>(cfg.num("eval_fraction", 0.10));
  tc.seed = seed;
  return tc;
}

int cmd_clean_titles(const PipelineConfig& cfg) {
  const auto raw = read_lines(cfg.required("titles"));
  topics::CleaningStats stats;
  const auto gaz = topics::Gazetteer::clean_titles(raw, cleaning_config(cfg), &stats);
  const std::string out_path = cfg.required("gazetteer");
  gaz.save(out_path);

  json j{{"input", stats.input},
         {"kept", stats.kept},
         {"removed_common_word", stats.removed_common_word},
         {"removed_numeric", stats.removed_numeric},
         {"removed_technical", stats.removed_technical},
         {"removed_unigram", stats.removed_unigram},
         {"removed_ngram_range", stats.removed_ngram_range},
         {"removed_duplicate", stats.removed_duplicate}};
  std::ofstream stats_out(out_path + ".stats.json");
  stats_out << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_build_corpus(const PipelineConfig& cfg) {
  auto docs = read_documents(cfg.required("docs"));
  const int hash_dim = cfg.integer("embed_hash_dim", topics::kDefaultEmbedDim);
  for (auto& doc : docs) doc.vec = topics::embed_document(doc.words, hash_dim);

  const double threshold = cfg.num("dedup_threshold", 0.9);
  const auto unique_docs = topics::dedup(docs, threshold);
  const auto selected = topics::select_min_cover(unique_docs, cfg.integer("ngram_min", 2),
                                                 cfg.integer("ngram_max", 5));

  const auto vocab = topics::Vocabulary::load(cfg.required("vocab"));
  const auto gaz = topics::Gazetteer::load(cfg.required("gazetteer"));
  const topics::TagScheme scheme;
  const std::string prefix = cfg.required("corpus_out");

  json summary{{"input_documents", docs.size()},
               {"after_dedup", unique_docs.size()},
               {"selected", selected.size()}};
  for (int seq_len : cfg.int_list("seq_lens", {512, 64})) {
    std::vector<topics::ManifestEntry> manifest;
    const auto records =
        topics::emit_parallel_corpus(selected, gaz, vocab, scheme, seq_len, &manifest);
    const std::string base = prefix + "." + std::to_string(seq_len);
    {
      std::ofstream out(base + ".conll");
      topics::write_conll(out, records, scheme);
    }
    {
      std::ofstream out(base + ".pairs.txt");
      topics::write_pairs(out, records, scheme);
    }
    {
      std::ofstream out(base + ".manifest.jsonl");
      topics::write_manifest(out, manifest);
    }
    summary["records_" + std::to_string(seq_len)] = records.size();
  }
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_train(const PipelineConfig& cfg, std::uint64_t seed) {
  const auto vocab = topics::Vocabulary::load(cfg.required("vocab"));
  const topics::TagScheme scheme;
  const std::string corpus_prefix = cfg.required("corpus_out");
  const std::string model_prefix = cfg.required("model_out");
  const topics::TrainConfig tc = train_config(cfg, seed);

  for (int seq_len : cfg.int_list("seq_lens", {512, 64})) {
    const std::string corpus_path = corpus_prefix + "." + std::to_string(seq_len) + ".conll";
    std::ifstream in(corpus_path);
    if (!in) throw input_error("cannot open corpus file: " + corpus_path);
    const auto records = topics::read_conll(in, vocab, scheme);

    auto model = topics::TaggerModel::create(vocab, cfg.integer("embed_dim", 128),
                                             cfg.integer("hidden_dim", 256), scheme,
                                             seq_len, seed);
    const auto metrics = topics::train(records, tc, model);

    const std::string base = model_prefix + "." + std::to_string(seq_len);
    topics::save_model(model, base + ".tpsq");
    std::ofstream mlog(base + ".metrics.jsonl");
    topics::write_metrics_log(mlog, metrics);
    const auto& last = metrics.back();
    std::cerr << "seq_len " << seq_len << ": stopped at epoch " << last.epoch
              << " (precision " << last.precision << ", recall " << last.recall << ")\n";
  }
  return kExitOk;
}

int cmd_tag(const PipelineConfig& cfg, const std::string& input_path,
            const std::string& out_path) {
  const auto vocab = topics::Vocabulary::load(cfg.required("vocab"));
  const std::string model_prefix = cfg.required("model_out");
  const int stride = cfg.integer("stride", 32);

  std::vector<topics::TaggerModel> models;
  std::vector<topics::SpanSource> sources;
  for (int seq_len : cfg.int_list("seq_lens", {512, 64})) {
    models.push_back(topics::load_model(
        model_prefix + "." + std::to_string(seq_len) + ".tpsq", vocab));
    sources.push_back(seq_len >= 256 ? topics::SpanSource::kLongContext
                                     : topics::SpanSource::kShortContext);
  }

  std::ifstream in(input_path);
  if (!in) throw input_error("cannot open input file: " + input_path);
  std::ofstream file_out;
  if (!out_path.empty()) {
    file_out.open(out_path);
    if (!file_out) throw input_error("cannot write output file: " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file_out;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const auto words = topics::normalize_words(j.at("text").get<std::string>());
    std::vector<topics::Span> spans;
    if (!words.empty()) {
      const auto doc = topics::tokenize_doc(words, vocab);
      for (std::size_t m = 0; m < models.size(); ++m) {
        const int model_stride = std::min(stride, models[m].seq_len);
        auto model_spans = topics::sliding_infer(doc, models[m], model_stride, sources[m]);
        spans = m == 0 ? std::move(model_spans)
                       : topics::dual_union(spans, model_spans, words);
      }
      spans = topics::drop_numeric_spans(std::move(spans));
    }
    json out_spans = json::array();
    for (const auto& s : spans) out_spans.push_back(s.text);
    out << json{{"doc_id", j.at("id")}, {"spans", out_spans}}.dump() << '\n';
  }
  return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& ref_path, bool partial,
             const std::string& out_path) {
  const auto run = topics::evaluate_run(pred_path, ref_path, partial);
  topics::write_report(std::cout, run);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    topics::write_report(out, run);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak-supervision topic detection pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  bool deterministic = false;
  app.add_option("--config", config_path, "pipeline configuration file");
  app.add_option("--seed", seed, "PRNG seed (overrides config)");
  app.add_flag("--deterministic", deterministic,
               "single-threaded, fixed reduction order");

  auto* clean = app.add_subcommand("clean-titles", "clean a raw title list into a gazetteer");
  auto* build = app.add_subcommand("build-corpus", "build tag-aligned parallel corpora");
  auto* train = app.add_subcommand("train", "train one model per sequence length");
  auto* tag = app.add_subcommand("tag", "extract topic n-grams from documents");
  auto* eval = app.add_subcommand("eval", "score predictions against references");

  std::string tag_input, tag_out;
  tag->add_option("input", tag_input, "documents JSONL file")->required();
  tag->add_option("--out", tag_out, "output spans JSONL file (default stdout)");

  std::string eval_pred, eval_ref, eval_out;
  bool eval_partial = false;
  eval->add_option("pred", eval_pred, "predictions JSONL file")->required();
  eval->add_option("ref", eval_ref, "reference JSONL file")->required();
  eval->add_flag("--partial", eval_partial, "enable partial (containment) matching");
  eval->add_option("--out", eval_out, "also write the report to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg;
    if (clean->parsed() || build->parsed() || train->parsed() || tag->parsed()) {
      if (config_path.empty()) throw input_error("--config is required for this command");
      cfg = PipelineConfig::load(config_path);
      if (cfg.kv.count("seed") && !app.count("--seed")) {
        seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
      }
    }
    if (clean->parsed()) return cmd_clean_titles(cfg);
    if (build->parsed()) return cmd_build_corpus(cfg);
    if (train->parsed()) return cmd_train(cfg, seed);
    if (tag->parsed()) return cmd_tag(cfg, tag_input, tag_out);
    if (eval->parsed()) return cmd_eval(eval_pred, eval_ref, eval_partial, eval_out);
  } catch (const topics::incompatible_model_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const topics::alignment_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAlignment;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
