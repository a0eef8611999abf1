#include "topics/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "topics/text.hpp"

namespace topics {
namespace {

EvalReport report_from_counts(int n_pred, int n_ref, int matched_pred, int matched_ref,
                              bool partial) {
  EvalReport r;
  r.n_pred = n_pred;
  r.n_ref = n_ref;
  r.n_matched_pred = matched_pred;
  r.n_matched_ref = matched_ref;
  r.partial_match = partial;
  r.precision = n_pred > 0 ? static_cast<double>(matched_pred) / n_pred : 0.0;
  r.recall = n_ref > 0 ? static_cast<double>(matched_ref) / n_ref : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

struct MatchCounts {
  int n_pred = 0, n_ref = 0, matched_pred = 0, matched_ref = 0;
};

MatchCounts count_matches(const std::set<std::string>& pred,
                          const std::set<std::string>& ref, bool partial) {
  MatchCounts c;
  c.n_pred = static_cast<int>(pred.size());
  c.n_ref = static_cast<int>(ref.size());
  for (const auto& p : pred) {
    bool matched = ref.count(p) > 0;
    if (!matched && partial) {
      matched = std::any_of(ref.begin(), ref.end(), [&](const std::string& r) {
        return is_word_subsequence(r, p);
      });
    }
    if (matched) ++c.matched_pred;
  }
  for (const auto& r : ref) {
    bool covered = pred.count(r) > 0;
    if (!covered && partial) {
      covered = std::any_of(pred.begin(), pred.end(), [&](const std::string& p) {
        return is_word_subsequence(r, p);
      });
    }
    if (covered) ++c.matched_ref;
  }
  return c;
}

using DocSets = std::vector<std::pair<std::string, std::set<std::string>>>;

DocSets read_spans_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spans file: " + path);
  std::map<std::string, std::set<std::string>> by_id;
  std::vector<std::string> order;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    const std::string id = j.at("doc_id");
    if (!by_id.count(id)) order.push_back(id);
    for (const auto& s : j.at("spans")) {
      by_id[id].insert(normalize_phrase(s.get<std::string>()));
    }
    by_id.try_emplace(id);
  }
  DocSets out;
  out.reserve(order.size());
  for (const auto& id : order) out.emplace_back(id, by_id[id]);
  return out;
}

}  // namespace

bool is_word_subsequence(const std::string& needle, const std::string& haystack) {
  const auto nw = split_ws(needle);
  const auto hw = split_ws(haystack);
  if (nw.empty() || nw.size() > hw.size()) return false;
  for (std::size_t i = 0; i + nw.size() <= hw.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < nw.size(); ++k) {
      if (hw[i + k] != nw[k]) { ok = false; break; }
    }
    if (ok) return true;
  }
  return false;
}

EvalReport match_sets(const std::set<std::string>& pred,
                      const std::set<std::string>& ref, bool partial) {
  if (ref.empty()) throw undefined_recall_error("match_sets: empty reference set");
  if (pred.empty()) {
    std::cerr << "warning: empty prediction set, precision defined as 0\n";
  }
  const MatchCounts c = count_matches(pred, ref, partial);
  return report_from_counts(c.n_pred, c.n_ref, c.matched_pred, c.matched_ref, partial);
}

RunEval evaluate_docs(const DocSets& pred, const DocSets& ref, bool partial) {
  std::map<std::string, const std::set<std::string>*> ref_by_id;
  for (const auto& [id, spans] : ref) ref_by_id.emplace(id, &spans);
  std::map<std::string, const std::set<std::string>*> pred_by_id;
  for (const auto& [id, spans] : pred) pred_by_id.emplace(id, &spans);

  std::vector<std::string> offending;
  for (const auto& [id, spans] : pred) {
    if (!ref_by_id.count(id)) offending.push_back(id);
  }
  for (const auto& [id, spans] : ref) {
    if (!pred_by_id.count(id)) offending.push_back(id);
  }
  if (!offending.empty()) {
    std::string msg = "document id mismatch between prediction and reference:";
    for (const auto& id : offending) msg += " " + id;
    throw alignment_error(msg, std::move(offending));
  }

  RunEval run;
  MatchCounts total;
  for (const auto& [id, pred_spans] : pred) {
    const auto& ref_spans = *ref_by_id.at(id);
    const MatchCounts c = count_matches(pred_spans, ref_spans, partial);
    total.n_pred += c.n_pred;
    total.n_ref += c.n_ref;
    total.matched_pred += c.matched_pred;
    total.matched_ref += c.matched_ref;
    run.per_doc.push_back(DocEval{
        id, report_from_counts(c.n_pred, c.n_ref, c.matched_pred, c.matched_ref, partial)});
  }
  if (total.n_ref == 0) {
    throw undefined_recall_error("evaluate_run: reference corpus has no spans");
  }
  run.overall = report_from_counts(total.n_pred, total.n_ref, total.matched_pred,
                                   total.matched_ref, partial);
  return run;
}

RunEval evaluate_run(const std::string& pred_path, const std::string& ref_path,
                     bool partial) {
  return evaluate_docs(read_spans_file(pred_path), read_spans_file(ref_path), partial);
}

void write_report(std::ostream& out, const RunEval& run) {
  auto to_json = [](const EvalReport& r) {
    return nlohmann::json{{"precision", r.precision},
                          {"recall", r.recall},
                          {"f1", r.f1},
                          {"n_pred", r.n_pred},
                          {"n_ref", r.n_ref},
                          {"n_matched_pred", r.n_matched_pred},
                          {"n_matched_ref", r.n_matched_ref},
                          {"partial_match", r.partial_match}};
  };
  nlohmann::json j = to_json(run.overall);
  nlohmann::json breakdown = nlohmann::json::array();
  for (const auto& d : run.per_doc) {
    nlohmann::json dj = to_json(d.report);
    dj["doc_id"] = d.doc_id;
    breakdown.push_back(std::move(dj));
  }
  j["per_doc"] = std::move(breakdown);
  out << j.dump(2) << '\n';
}

}  // namespace topics
