#pragma once

#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace topics {

struct undefined_recall_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct alignment_error : std::runtime_error {
  alignment_error(const std::string& what, std::vector<std::string> ids)
      : std::runtime_error(what), offending_ids(std::move(ids)) {}
  std::vector<std::string> offending_ids;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int n_pred = 0;
  int n_ref = 0;
  int n_matched_pred = 0;
  int n_matched_ref = 0;
  bool partial_match = false;
};

// True if `needle` appears in `haystack` as a contiguous word subsequence.
bool is_word_subsequence(const std::string& needle, const std::string& haystack);

// Exact mode: predictions match references by string equality. Partial mode:
// a prediction also matches when some reference is a contiguous word
// subsequence of it, and a reference is covered when it is a word
// subsequence of some prediction.
EvalReport match_sets(const std::set<std::string>& pred,
                      const std::set<std::string>& ref, bool partial);

struct DocEval {
  std::string doc_id;
  EvalReport report;
};

struct RunEval {
  EvalReport overall;  // micro-averaged counts
  std::vector<DocEval> per_doc;
};

// Prediction/reference files: JSON lines {"doc_id": ..., "spans": [...]}.
RunEval evaluate_run(const std::string& pred_path, const std::string& ref_path,
                     bool partial);
RunEval evaluate_docs(const std::vector<std::pair<std::string, std::set<std::string>>>& pred,
                      const std::vector<std::pair<std::string, std::set<std::string>>>& ref,
                      bool partial);

void write_report(std::ostream& out, const RunEval& run);

}  // namespace topics
