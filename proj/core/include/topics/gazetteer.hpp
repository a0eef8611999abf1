#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "topics/tokenizer.hpp"

namespace topics {

struct CleaningConfig {
  std::set<std::string> common_words;        // defaults to the shipped stoplist
  std::set<std::string> location_whitelist;  // 1-grams allowed through
  bool remove_any_numeric_token = false;     // default: only fully-numeric titles go
  int keep_min_words = 1;
  int keep_max_words = 5;

  static CleaningConfig defaults();
};

struct CleaningStats {
  int input = 0;
  int kept = 0;
  int removed_common_word = 0;
  int removed_numeric = 0;
  int removed_technical = 0;
  int removed_unigram = 0;
  int removed_ngram_range = 0;
  int removed_duplicate = 0;
};

// True for short letter-digit mixture tokens like "x00" or "lga-775".
bool is_technical_token(const std::string& token);

// Cleaned title set indexed for leftmost-longest n-gram lookup.
class Gazetteer {
 public:
  Gazetteer() = default;

  // Applies the cleaning rules to a raw title list.
  static Gazetteer clean_titles(const std::vector<std::string>& raw_titles,
                                const CleaningConfig& config,
                                CleaningStats* stats = nullptr);

  // Builds directly from already-clean titles (tests, file reload).
  static Gazetteer from_titles(const std::vector<std::string>& titles);

  static Gazetteer load(const std::string& path);
  void save(const std::string& path) const;  // sorted, deduplicated

  bool contains(const std::string& title) const;
  int size() const { return static_cast<int>(titles_.size()); }
  int max_len() const { return max_len_; }
  std::vector<std::string> sorted_titles() const;

  // Left-to-right greedy longest match; matched title words get the NER tag,
  // everything else the outside tag. Output length == |words|.
  std::vector<int> weak_label(const std::vector<std::string>& words,
                              const TagScheme& scheme) const;

 private:
  void insert(const std::string& title);

  std::unordered_set<std::string> titles_;
  // first word -> candidate word sequences, longest first
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> index_;
  int max_len_ = 0;
};

const std::set<std::string>& default_common_words();

}  // namespace topics
