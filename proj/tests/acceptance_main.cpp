// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 drives the installed CLI binary end to end.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "topics/corpus.hpp"
#include "topics/crf.hpp"
#include "topics/eval.hpp"
#include "topics/gazetteer.hpp"
#include "topics/neural.hpp"
#include "topics/tagger.hpp"
#include "topics/text.hpp"
#include "topics/tokenizer.hpp"

namespace fs = std::filesystem;
using namespace topics;

namespace {

struct check_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw check_failure(what);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: Viterbi and log-partition against exhaustive enumeration.

double brute_score(const DMatrix& e, const std::vector<int>& tags, const CrfParams& p) {
  double s = static_cast<double>(p.start[static_cast<std::size_t>(tags.front())]) +
             static_cast<double>(p.end[static_cast<std::size_t>(tags.back())]);
  for (std::size_t t = 0; t < tags.size(); ++t) {
    s += e(static_cast<int>(t), tags[t]);
    if (t > 0) s += static_cast<double>(p.trans(tags[t - 1], tags[t]));
  }
  return s;
}

void criterion_crf_correctness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240817);
  std::uniform_int_distribution<int> t_dist(1, 8);
  std::uniform_int_distribution<int> k_dist(2, 4);
  std::uniform_real_distribution<float> p_dist(-2.0f, 2.0f);
  std::uniform_real_distribution<double> e_dist(-3.0, 3.0);

  for (int trial = 0; trial < 100; ++trial) {
    const int t_len = t_dist(rng);
    const int k = k_dist(rng);
    CrfParams p = CrfParams::zeros(k);
    for (float& v : p.trans.data()) v = p_dist(rng);
    for (float& v : p.start) v = p_dist(rng);
    for (float& v : p.end) v = p_dist(rng);
    DMatrix e(t_len, k);
    for (double& v : e.data()) v = e_dist(rng);

    std::vector<int> tags(static_cast<std::size_t>(t_len), 0);
    std::vector<int> best_tags = tags;
    double best = -1e300, max_score = -1e300;
    std::vector<double> scores;
    for (;;) {
      const double s = brute_score(e, tags, p);
      scores.push_back(s);
      max_score = std::max(max_score, s);
      if (s > best) {
        best = s;
        best_tags = tags;
      }
      int pos = t_len - 1;
      while (pos >= 0 && tags[static_cast<std::size_t>(pos)] == k - 1) {
        tags[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++tags[static_cast<std::size_t>(pos)];
    }
    double acc = 0.0;
    for (double s : scores) acc += std::exp(s - max_score);
    const double log_z_oracle = max_score + std::log(acc);

    const auto [vit_tags, vit_score] = viterbi(e, p);
    require(vit_tags == best_tags, "viterbi path differs from enumeration argmax");
    require(std::abs(vit_score - best) <= 1e-9, "viterbi score off by > 1e-9");
    require(std::abs(log_partition(e, p) - log_z_oracle) <= 1e-6,
            "log_partition off by > 1e-6");
  }
  require(seconds_since(start) < 10.0, "CRF correctness battery exceeded 10 s");
}

// ---------------------------------------------------------------------------
// Criterion 2: full-model gradients against central finite differences.

struct SmallModel {
  Encoder encoder;
  GruParams gru;
  CrfParams crf;
  std::vector<int> ids;
  std::vector<int> gold;
};

double model_loss(const SmallModel& m) {
  const DMatrix x = m.encoder.encode(m.ids);
  const DMatrix h = bigru_forward(x, m.gru);
  const DMatrix e = emissions(h, m.gru);
  return nll_and_gradients(e, m.gold, m.crf).loss;
}

void collect_param(Matrix& m, std::vector<float*>& out) {
  for (float& v : m.data()) out.push_back(&v);
}
void collect_param(std::vector<float>& v, std::vector<float*>& out) {
  for (float& x : v) out.push_back(&x);
}
void collect_grad(const DMatrix& m, std::vector<double>& out) {
  for (double v : m.data()) out.push_back(v);
}
void collect_grad(const std::vector<double>& v, std::vector<double>& out) {
  out.insert(out.end(), v.begin(), v.end());
}

void flatten(SmallModel& m, std::vector<float*>& params, std::vector<double>& grads) {
  const DMatrix x = m.encoder.encode(m.ids);
  GruCache cache;
  const DMatrix h = bigru_forward(x, m.gru, &cache);
  const DMatrix e = emissions(h, m.gru);
  const CrfGrads cg = nll_and_gradients(e, m.gold, m.crf);
  const GruGrads g = backward(cg.d_emissions, cache, m.gru);

  for (GruDirection* d : {&m.gru.fwd, &m.gru.bwd}) {
    collect_param(d->w_z, params);
    collect_param(d->w_r, params);
    collect_param(d->w_h, params);
    collect_param(d->u_z, params);
    collect_param(d->u_r, params);
    collect_param(d->u_h, params);
    collect_param(d->b_z, params);
    collect_param(d->b_r, params);
    collect_param(d->b_h, params);
  }
  collect_param(m.gru.proj_w, params);
  collect_param(m.gru.proj_b, params);
  collect_param(m.crf.trans, params);
  collect_param(m.crf.start, params);
  collect_param(m.crf.end, params);
  collect_param(m.encoder.table(), params);

  for (const GruDirectionGrads* d : {&g.fwd, &g.bwd}) {
    collect_grad(d->w_z, grads);
    collect_grad(d->w_r, grads);
    collect_grad(d->w_h, grads);
    collect_grad(d->u_z, grads);
    collect_grad(d->u_r, grads);
    collect_grad(d->u_h, grads);
    collect_grad(d->b_z, grads);
    collect_grad(d->b_r, grads);
    collect_grad(d->b_h, grads);
  }
  collect_grad(g.proj_w, grads);
  collect_grad(g.proj_b, grads);
  collect_grad(cg.d_trans, grads);
  collect_grad(cg.d_start, grads);
  collect_grad(cg.d_end, grads);

  DMatrix table_grad(m.encoder.table().rows(), m.encoder.table().cols());
  for (int t = 0; t < g.input.rows(); ++t) {
    for (int c = 0; c < g.input.cols(); ++c) {
      table_grad(m.ids[static_cast<std::size_t>(t)], c) += g.input(t, c);
    }
  }
  collect_grad(table_grad, grads);
}

void criterion_gradient_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 meta_rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> t_dist(2, 6);
    std::uniform_int_distribution<int> d_dist(2, 4);
    std::uniform_int_distribution<int> h_dist(2, 5);
    std::uniform_int_distribution<int> k_dist(2, 3);
    const int t_len = t_dist(meta_rng);
    const int embed = d_dist(meta_rng);
    const int hidden = h_dist(meta_rng);
    const int k = k_dist(meta_rng);
    const int vocab = 5 + trial % 4;

    SmallModel m;
    m.encoder = Encoder::lookup(vocab, embed, 1000 + static_cast<std::uint64_t>(trial));
    m.gru = GruParams::init(embed, hidden, k, 2000 + static_cast<std::uint64_t>(trial));
    m.crf = CrfParams::zeros(k);
    std::uniform_real_distribution<float> p_dist(-0.5f, 0.5f);
    for (float& v : m.crf.trans.data()) v = p_dist(meta_rng);
    for (float& v : m.crf.start) v = p_dist(meta_rng);
    for (float& v : m.crf.end) v = p_dist(meta_rng);
    std::uniform_int_distribution<int> id_dist(0, vocab - 1);
    std::uniform_int_distribution<int> tag_dist(0, k - 1);
    for (int t = 0; t < t_len; ++t) {
      m.ids.push_back(id_dist(meta_rng));
      m.gold.push_back(tag_dist(meta_rng));
    }

    std::vector<float*> params;
    std::vector<double> grads;
    flatten(m, params, grads);
    require(params.size() == grads.size(), "parameter/gradient count mismatch");

    const double eps = 1e-4;
    for (std::size_t i = 0; i < params.size(); ++i) {
      float* slot = params[i];
      const float saved = *slot;
      *slot = static_cast<float>(static_cast<double>(saved) + eps);
      const double hi_p = static_cast<double>(*slot);
      const double hi_l = model_loss(m);
      *slot = static_cast<float>(static_cast<double>(saved) - eps);
      const double lo_p = static_cast<double>(*slot);
      const double lo_l = model_loss(m);
      *slot = saved;
      const double fd = (hi_l - lo_l) / (hi_p - lo_p);
      const double tol = 1e-4 * std::max({1.0, std::abs(fd), std::abs(grads[i])});
      if (std::abs(grads[i] - fd) > tol) {
        std::ostringstream msg;
        msg << "gradient mismatch at slot " << i << ": analytic " << grads[i]
            << " vs finite-difference " << fd;
        throw check_failure(msg.str());
      }
    }
  }
  require(seconds_since(start) < 60.0, "gradient battery exceeded 60 s");
}

// ---------------------------------------------------------------------------
// Criterion 3: reference sentence through the corpus pipeline.

void criterion_reference_sentence() {
  const Vocabulary vocab({"[unk]", "the", "me", "too", "movement", ",", "with",
                          "a", "large", "variety", "of", "local", "and",
                          "international", "related", "names", "is", "against",
                          "sexual", "har", "##ass", "##ment", "assault"});
  const auto gaz = Gazetteer::from_titles(
      {"Me Too movement", "sexual harassment", "sexual assault"});
  const TagScheme scheme;

  const auto doc = Document::make(
      "t1",
      "The Me Too movement, with a large variety of local and international "
      "related names, is a movement against sexual harassment and sexual assault");
  require(doc.words.size() == 25, "expected 25 normalized words");

  const auto tags = gaz.weak_label(doc.words, scheme);
  const auto seq = tokenize_tagged(doc.words, tags, vocab, scheme);
  require(seq.size() == 27, "expected 27 pieces");

  std::string piece_row, tag_row;
  for (int t = 0; t < seq.size(); ++t) {
    if (t > 0) {
      piece_row += ' ';
      tag_row += ' ';
    }
    piece_row += seq.pieces[static_cast<std::size_t>(t)];
    tag_row += scheme.labels[static_cast<std::size_t>(seq.tags[static_cast<std::size_t>(t)])];
  }

  const std::string expected_pieces =
      "the me too movement , with a large variety of local and international "
      "related names , is a movement against sexual har ##ass ##ment and "
      "sexual assault";
  const std::string expected_tags =
      "0 NER NER NER 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 NER NER NER NER 0 NER NER";
  require(piece_row == expected_pieces, "tokenized text row mismatch:\n  got " + piece_row);
  require(tag_row == expected_tags, "tokenized tag row mismatch:\n  got " + tag_row);
}

// ---------------------------------------------------------------------------
// Criterion 4: cleaning-rule fixture.

void criterion_cleaning_fixture() {
  CleaningConfig cfg = CleaningConfig::defaults();
  cfg.location_whitelist = {"delhi"};
  const auto gaz = Gazetteer::clean_titles(
      {"which", "29", "101", "lga-775", "x00", "mumbai", "Me Too movement",
       "Delhi"},
      cfg, nullptr);
  const auto titles = gaz.sorted_titles();
  const std::set<std::string> got(titles.begin(), titles.end());
  const std::set<std::string> expected{"delhi", "me too movement"};
  require(got == expected, "cleaned title set differs from the expected set");
}

// ---------------------------------------------------------------------------
// Criterion 5: synthetic end-to-end training surrogate.

struct SyntheticCorpus {
  Vocabulary vocab;
  Gazetteer gaz;
  std::vector<std::vector<std::string>> sentences;
  std::vector<TaggedSequence> records;
};

SyntheticCorpus make_synthetic_corpus(int n_sentences, std::uint64_t seed) {
  std::vector<std::string> pieces{"[unk]"};
  for (int i = 0; i < 300; ++i) pieces.push_back("bg" + std::to_string(i));
  for (int i = 0; i < 60; ++i) pieces.push_back("tp" + std::to_string(i));

  SyntheticCorpus c{Vocabulary(pieces), Gazetteer(), {}, {}};
  std::vector<std::string> titles;
  for (int i = 0; i < 50; ++i) {
    titles.push_back("tp" + std::to_string(i) + " tp" + std::to_string(i + 1));
  }
  c.gaz = Gazetteer::from_titles(titles);

  const TagScheme scheme;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len_dist(12, 18);
  std::uniform_int_distribution<int> bg_dist(0, 299);
  std::uniform_int_distribution<int> topic_dist(0, 49);
  std::uniform_int_distribution<int> n_topic_dist(1, 2);

  for (int s = 0; s < n_sentences; ++s) {
    std::vector<std::string> words;
    const int n = len_dist(rng);
    for (int i = 0; i < n; ++i) words.push_back("bg" + std::to_string(bg_dist(rng)));
    const int n_topics = n_topic_dist(rng);
    for (int i = 0; i < n_topics; ++i) {
      const int topic = topic_dist(rng);
      const std::size_t pos =
          std::uniform_int_distribution<std::size_t>(0, words.size())(rng);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos),
                   {"tp" + std::to_string(topic), "tp" + std::to_string(topic + 1)});
    }
    const auto tags = c.gaz.weak_label(words, scheme);
    c.records.push_back(tokenize_tagged(words, tags, c.vocab, scheme));
    c.sentences.push_back(std::move(words));
  }
  return c;
}

void criterion_synthetic_training() {
  const auto start = std::chrono::steady_clock::now();
  const SyntheticCorpus corpus = make_synthetic_corpus(2000, 404);
  require(corpus.vocab.size() <= 500, "synthetic vocabulary exceeds 500 pieces");

  const TagScheme scheme;
  TaggerModel model = TaggerModel::create(corpus.vocab, 64, 64, scheme, 32, 12);
  TrainConfig cfg;
  cfg.learning_rate = 0.1f;
  cfg.batch_size = 32;
  cfg.max_epochs = 16;
  cfg.precision_stop = 0.70f;
  cfg.recall_stop = 0.90f;
  cfg.eval_fraction = 0.10f;
  cfg.seed = 9;

  const auto metrics = train(corpus.records, cfg, model);
  require(!metrics.empty(), "no training epochs ran");
  const auto& last = metrics.back();
  std::ostringstream summary;
  summary << "stopped at epoch " << last.epoch << " with precision "
          << last.precision << ", recall " << last.recall;
  require(last.epoch <= 16, "did not stop within 16 epochs (" + summary.str() + ")");
  require(last.precision >= 0.70, "precision below 0.70 (" + summary.str() + ")");
  require(last.recall >= 0.90, "recall below 0.90 (" + summary.str() + ")");
  require(seconds_since(start) < 600.0, "synthetic training exceeded 10 minutes");
  std::cout << "  (" << summary.str() << ", "
            << static_cast<int>(seconds_since(start)) << " s)\n";
}

// ---------------------------------------------------------------------------
// Criterion 6: partial-match protocol example.

void criterion_partial_match() {
  const std::set<std::string> pred{"president of nrgi"};
  const std::set<std::string> ref{"nrgi"};
  const EvalReport on = match_sets(pred, ref, true);
  require(on.precision == 1.0 && on.recall == 1.0, "partial on: expected P = R = 1");
  const EvalReport off = match_sets(pred, ref, false);
  require(off.precision == 0.0 && off.recall == 0.0, "partial off: expected P = R = 0");
}

// ---------------------------------------------------------------------------
// Criterion 7: sliding-window consistency.

TokenizedDoc synthetic_doc(int n_words, int vocab_size, std::uint64_t seed) {
  TokenizedDoc doc;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, vocab_size - 1);
  for (int w = 0; w < n_words; ++w) {
    doc.words.push_back("w" + std::to_string(w));
    doc.pieces.push_back(doc.words.back());
    doc.piece_ids.push_back(dist(rng));
    doc.word_boundaries.push_back(w);
    doc.word_of_piece.push_back(w);
  }
  return doc;
}

bool spans_equal(const std::vector<Span>& a, const std::vector<Span>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

void criterion_sliding_window() {
  std::vector<std::string> pieces{"[unk]"};
  for (int i = 1; i < 40; ++i) pieces.push_back("p" + std::to_string(i));
  const Vocabulary vocab(pieces);
  const TagScheme scheme;
  const TaggerModel model = TaggerModel::create(vocab, 16, 16, scheme, 64, 31);

  for (int trial = 0; trial < 20; ++trial) {
    const auto doc = synthetic_doc(200, vocab.size(), 600 + static_cast<std::uint64_t>(trial));
    const auto strided = sliding_infer(doc, model, 32, SpanSource::kShortContext);
    const auto oracle = sliding_infer(doc, model, 1, SpanSource::kShortContext);

    for (const auto& s : strided) {
      const bool contained = std::any_of(oracle.begin(), oracle.end(), [&](const Span& o) {
        return o.word_start <= s.word_start && s.word_end <= o.word_end;
      });
      require(contained, "strided span not contained in any all-offsets span");
    }

    const auto u_ss = dual_union(strided, strided, doc.words);
    require(spans_equal(u_ss, strided), "dual_union is not idempotent");
    const auto u_ab = dual_union(strided, oracle, doc.words);
    const auto u_ba = dual_union(oracle, strided, doc.words);
    require(spans_equal(u_ab, u_ba), "dual_union is not commutative");
  }
}

// ---------------------------------------------------------------------------
// Criterion 8: serialization round trip and fingerprint rejection.

void criterion_serialization() {
  std::vector<std::string> pieces{"[unk]", "alpha", "beta", "gamma"};
  const Vocabulary vocab(pieces);
  const TagScheme scheme;
  const TaggerModel model = TaggerModel::create(vocab, 12, 10, scheme, 48, 55);
  const fs::path path = fs::path("acceptance_model.tpsq");
  save_model(model, path.string());
  const TaggerModel back = load_model(path.string(), vocab);

  require(back.encoder.table().data() == model.encoder.table().data(),
          "encoder table not bit-exact");
  const GruDirection* dirs_a[] = {&model.gru.fwd, &model.gru.bwd};
  const GruDirection* dirs_b[] = {&back.gru.fwd, &back.gru.bwd};
  for (int d = 0; d < 2; ++d) {
    require(dirs_b[d]->w_z.data() == dirs_a[d]->w_z.data() &&
                dirs_b[d]->w_r.data() == dirs_a[d]->w_r.data() &&
                dirs_b[d]->w_h.data() == dirs_a[d]->w_h.data() &&
                dirs_b[d]->u_z.data() == dirs_a[d]->u_z.data() &&
                dirs_b[d]->u_r.data() == dirs_a[d]->u_r.data() &&
                dirs_b[d]->u_h.data() == dirs_a[d]->u_h.data() &&
                dirs_b[d]->b_z == dirs_a[d]->b_z &&
                dirs_b[d]->b_r == dirs_a[d]->b_r &&
                dirs_b[d]->b_h == dirs_a[d]->b_h,
            "GRU direction tensors not bit-exact");
  }
  require(back.gru.proj_w.data() == model.gru.proj_w.data() &&
              back.gru.proj_b == model.gru.proj_b,
          "projection not bit-exact");
  require(back.crf.trans.data() == model.crf.trans.data() &&
              back.crf.start == model.crf.start && back.crf.end == model.crf.end,
          "CRF parameters not bit-exact");
  require(back.seq_len == model.seq_len &&
              back.vocab_fingerprint == model.vocab_fingerprint,
          "model metadata not preserved");

  const Vocabulary other({"[unk]", "entirely", "different"});
  bool rejected = false;
  try {
    load_model(path.string(), other);
  } catch (const incompatible_model_error&) {
    rejected = true;
  }
  require(rejected, "fingerprint mismatch was not rejected");
  fs::remove(path);
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI pipeline determinism.

#ifndef TOPICS_CLI_PATH
#define TOPICS_CLI_PATH "topics"
#endif

void run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string("\"") + TOPICS_CLI_PATH + "\" " + args + " > \"" + log.string() +
      "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    std::ifstream in(log);
    std::stringstream tail;
    tail << in.rdbuf();
    throw check_failure("CLI command failed: " + cmd + "\n" + tail.str());
  }
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "missing output file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_pipeline_inputs(const fs::path& dir) {
  // Small closed world: 20 background words, 8 topic words forming 4 titles.
  std::vector<std::string> pieces{"[unk]"};
  for (int i = 0; i < 20; ++i) pieces.push_back("w" + std::to_string(i));
  for (int i = 0; i < 8; ++i) pieces.push_back("t" + std::to_string(i));
  {
    std::ofstream out(dir / "vocab.txt");
    for (const auto& p : pieces) out << p << '\n';
  }
  {
    std::ofstream out(dir / "titles.txt");
    out << "t0 t1\n"
        << "t2 t3\n"
        << "t4 t5\n"
        << "t6 t7\n"
        << "which\n"
        << "29\n"
        << "x00\n"
        << "solo\n";
  }
  {
    std::ofstream out(dir / "docs.jsonl");
    std::mt19937_64 rng(321);
    std::uniform_int_distribution<int> bg(0, 19);
    std::uniform_int_distribution<int> topic(0, 3);
    for (int d = 0; d < 80; ++d) {
      std::vector<std::string> words;
      for (int i = 0; i < 10; ++i) words.push_back("w" + std::to_string(bg(rng)));
      const int t = topic(rng);
      const std::size_t pos =
          std::uniform_int_distribution<std::size_t>(0, words.size())(rng);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos),
                   {"t" + std::to_string(2 * t), "t" + std::to_string(2 * t + 1)});
      std::string text;
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) text += ' ';
        text += words[i];
      }
      out << "{\"id\": \"doc" << d << "\", \"text\": \"" << text << "\"}\n";
    }
  }
}

void write_pipeline_config(const fs::path& dir) {
  std::ofstream out(dir / "pipeline.cfg");
  out << "titles = " << (dir / "titles.txt").string() << "\n"
      << "gazetteer = " << (dir / "gazetteer.txt").string() << "\n"
      << "vocab = " << (dir / "vocab.txt").string() << "\n"
      << "docs = " << (dir / "docs.jsonl").string() << "\n"
      << "corpus_out = " << (dir / "corpus").string() << "\n"
      << "model_out = " << (dir / "model").string() << "\n"
      << "seq_lens = 24,12\n"
      << "dedup_threshold = 1.0\n"
      << "ngram_min = 2\n"
      << "ngram_max = 3\n"
      << "embed_dim = 16\n"
      << "hidden_dim = 16\n"
      << "learning_rate = 0.1\n"
      << "batch_size = 8\n"
      << "max_epochs = 2\n"
      << "eval_fraction = 0.1\n"
      << "stride = 8\n";
}

void run_pipeline(const fs::path& dir) {
  fs::create_directories(dir);
  write_pipeline_inputs(dir);
  write_pipeline_config(dir);
  const std::string common = "--config \"" + (dir / "pipeline.cfg").string() +
                             "\" --seed 7 --deterministic ";
  run_cli(common + "clean-titles", dir / "clean.log");
  run_cli(common + "build-corpus", dir / "build.log");
  run_cli(common + "train", dir / "train.log");
  run_cli(common + "tag \"" + (dir / "docs.jsonl").string() + "\" --out \"" +
              (dir / "spans.jsonl").string() + "\"",
          dir / "tag.log");
}

void criterion_pipeline_determinism() {
  const fs::path root = fs::path("acceptance_tmp");
  fs::remove_all(root);
  const fs::path a = root / "run_a";
  const fs::path b = root / "run_b";
  run_pipeline(a);
  run_pipeline(b);

  const std::vector<std::string> outputs{
      "gazetteer.txt",       "gazetteer.txt.stats.json",
      "corpus.24.conll",     "corpus.24.pairs.txt",
      "corpus.24.manifest.jsonl", "corpus.12.conll",
      "corpus.12.pairs.txt", "corpus.12.manifest.jsonl",
      "model.24.tpsq",       "model.24.metrics.jsonl",
      "model.12.tpsq",       "model.12.metrics.jsonl",
      "spans.jsonl"};
  for (const auto& name : outputs) {
    require(read_bytes(a / name) == read_bytes(b / name),
            "output differs between runs: " + name);
  }
  fs::remove_all(root);
}

struct Criterion {
  const char* name;
  std::function<void()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"1 CRF correctness vs exhaustive enumeration", criterion_crf_correctness},
      {"2 gradient fidelity vs finite differences", criterion_gradient_fidelity},
      {"3 reference sentence reproduction", criterion_reference_sentence},
      {"4 cleaning-rule fixture", criterion_cleaning_fixture},
      {"5 synthetic end-to-end training", criterion_synthetic_training},
      {"6 partial-match protocol", criterion_partial_match},
      {"7 sliding-window consistency", criterion_sliding_window},
      {"8 serialization round trip", criterion_serialization},
      {"9 pipeline determinism", criterion_pipeline_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    try {
      c.fn();
      std::cout << "PASS criterion " << c.name << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL criterion " << c.name << ": " << e.what() << "\n";
    }
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
