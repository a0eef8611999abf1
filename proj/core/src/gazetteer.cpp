#include "topics/gazetteer.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "topics/text.hpp"

namespace topics {

const std::set<std::string>& default_common_words() {
  static const std::set<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am",
      "an", "and", "any", "are", "aren't", "as", "at", "be", "because",
      "been", "before", "being", "below", "between", "both", "but", "by",
      "came", "can", "can't", "cannot", "come", "could", "couldn't", "did",
      "didn't", "do", "does", "doesn't", "doing", "don't", "down", "during",
      "each", "else", "ever", "every", "few", "for", "from", "further",
      "get", "go", "goes", "got", "had", "hadn't", "has", "hasn't", "have",
      "haven't", "having", "he", "he'd", "he'll", "he's", "her", "here",
      "here's", "hers", "herself", "him", "himself", "his", "how", "how's",
      "however", "i", "i'd", "i'll", "i'm", "i've", "if", "in", "into",
      "is", "isn't", "it", "it's", "its", "itself", "just", "know", "let",
      "let's", "like", "made", "make", "many", "may", "me", "might", "more",
      "most", "much", "must", "mustn't", "my", "myself", "never", "new",
      "no", "nor", "not", "now", "of", "off", "on", "once", "one", "only",
      "or", "other", "ought", "our", "ours", "ourselves", "out", "over",
      "own", "put", "said", "same", "say", "says", "see", "shall", "shan't",
      "she", "she'd", "she'll", "she's", "should", "shouldn't", "since",
      "so", "some", "still", "such", "take", "than", "that", "that's",
      "the", "their", "theirs", "them", "themselves", "then", "there",
      "there's", "these", "they", "they'd", "they'll", "they're", "they've",
      "this", "those", "through", "to", "too", "under", "until", "up",
      "upon", "us", "use", "used", "very", "was", "wasn't", "way", "we",
      "we'd", "we'll", "we're", "we've", "well", "went", "were", "weren't",
      "what", "what's", "when", "when's", "where", "where's", "whether",
      "which", "while", "who", "who's", "whom", "why", "why's", "will",
      "with", "won't", "would", "wouldn't", "yes", "yet", "you", "you'd",
      "you'll", "you're", "you've", "your", "yours", "yourself",
      "yourselves"};
  return words;
}

CleaningConfig CleaningConfig::defaults() {
  CleaningConfig cfg;
  cfg.common_words = default_common_words();
  return cfg;
}

bool is_technical_token(const std::string& token) {
  if (token.empty() || token.size() > 8) return false;
  bool has_letter = false, has_digit = false;
  for (char c : token) {
    if (c >= '0' && c <= '9') has_digit = true;
    else if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) has_letter = true;
  }
  return has_letter && has_digit;
}

void Gazetteer::insert(const std::string& title) {
  auto [it, inserted] = titles_.insert(title);
  if (!inserted) return;
  std::vector<std::string> words = split_ws(title);
  max_len_ = std::max(max_len_, static_cast<int>(words.size()));
  auto& bucket = index_[words.front()];
  bucket.push_back(std::move(words));
  std::stable_sort(bucket.begin(), bucket.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
}

Gazetteer Gazetteer::clean_titles(const std::vector<std::string>& raw_titles,
                                  const CleaningConfig& config,
                                  CleaningStats* stats) {
  CleaningStats local;
  Gazetteer gaz;
  for (const auto& raw : raw_titles) {
    std::string title = normalize_phrase(raw);
    if (title.empty()) continue;
    ++local.input;
    std::vector<std::string> words = split_ws(title);
    int n = static_cast<int>(words.size());

    if (n < config.keep_min_words || n > config.keep_max_words) {
      ++local.removed_ngram_range;
      continue;
    }
    if (config.common_words.count(title)) {
      ++local.removed_common_word;
      continue;
    }
    bool all_numeric = true, any_numeric = false;
    for (const auto& w : words) {
      if (is_numeric_token(w)) any_numeric = true;
      else all_numeric = false;
    }
    if (all_numeric || (config.remove_any_numeric_token && any_numeric)) {
      ++local.removed_numeric;
      continue;
    }
    if (std::any_of(words.begin(), words.end(), is_technical_token)) {
      ++local.removed_technical;
      continue;
    }
    if (n == 1 && !config.location_whitelist.count(title)) {
      ++local.removed_unigram;
      continue;
    }
    if (gaz.contains(title)) {
      ++local.removed_duplicate;
      continue;
    }
    gaz.insert(title);
    ++local.kept;
  }
  if (stats) *stats = local;
  return gaz;
}

Gazetteer Gazetteer::from_titles(const std::vector<std::string>& titles) {
  Gazetteer gaz;
  for (const auto& t : titles) {
    std::string title = normalize_phrase(t);
    if (!title.empty()) gaz.insert(title);
  }
  return gaz;
}

Gazetteer Gazetteer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open gazetteer file: " + path);
  std::vector<std::string> titles;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) titles.push_back(line);
  }
  return from_titles(titles);
}

void Gazetteer::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gazetteer file: " + path);
  for (const auto& t : sorted_titles()) out << t << '\n';
}

bool Gazetteer::contains(const std::string& title) const {
  return titles_.count(title) > 0;
}

std::vector<std::string> Gazetteer::sorted_titles() const {
  std::vector<std::string> out(titles_.begin(), titles_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Gazetteer::weak_label(const std::vector<std::string>& words,
                                       const TagScheme& scheme) const {
  const int outside = scheme.outside_id();
  int ner = scheme.id_of("NER");
  if (ner < 0) {  // non-default schemes: first non-outside tag
    for (int k = 0; k < scheme.n_tags(); ++k) {
      if (k != outside) { ner = k; break; }
    }
  }
  std::vector<int> tags(words.size(), outside);
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t matched = 0;
    auto it = index_.find(words[i]);
    if (it != index_.end()) {
      for (const auto& cand : it->second) {  // longest first
        if (cand.size() > words.size() - i) continue;
        bool ok = true;
        for (std::size_t k = 1; k < cand.size(); ++k) {
          if (words[i + k] != cand[k]) { ok = false; break; }
        }
        if (ok) { matched = cand.size(); break; }
      }
    }
    if (matched > 0) {
      for (std::size_t k = 0; k < matched; ++k) tags[i + k] = ner;
      i += matched;
    } else {
      ++i;
    }
  }
  return tags;
}

}  // namespace topics
