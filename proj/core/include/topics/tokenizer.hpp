#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topics {

inline constexpr std::string_view kContinuationMarker = "##";
inline constexpr std::size_t kMaxWordChars = 100;

inline bool is_continuation_piece(std::string_view piece) {
  return piece.size() > 2 && piece.substr(0, 2) == kContinuationMarker;
}

// Subword inventory. Ids are dense 0..N-1 in file/line order; continuation
// pieces carry a leading "##".
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> pieces, std::string unk_piece = "[unk]");

  // One piece per line, id = line number.
  static Vocabulary load(const std::string& path, std::string unk_piece = "[unk]");
  void save(const std::string& path) const;

  int size() const { return static_cast<int>(pieces_.size()); }
  int id_of(const std::string& piece) const;  // -1 if absent
  bool contains(const std::string& piece) const { return id_of(piece) >= 0; }
  const std::string& piece(int id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  const std::string& unk_piece() const { return pieces_[static_cast<std::size_t>(unk_id_)]; }
  int unk_id() const { return unk_id_; }
  const std::vector<std::string>& pieces() const { return pieces_; }

  // FNV-1a over the newline-joined inventory; stored in model files and
  // checked on load.
  std::string fingerprint() const;

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> ids_;
  int unk_id_ = -1;
};

struct TagScheme {
  std::vector<std::string> labels{"0", "NER"};
  std::string outside_label = "0";

  int outside_id() const;
  int id_of(std::string_view label) const;  // -1 if absent
  int n_tags() const { return static_cast<int>(labels.size()); }
};

// One tag-aligned record: pieces, their ids and tags (all equal length),
// plus the first-piece index of every source word.
struct TaggedSequence {
  std::vector<std::string> pieces;
  std::vector<int> piece_ids;
  std::vector<int> tags;
  std::vector<int> word_boundaries;

  int size() const { return static_cast<int>(pieces.size()); }
  int n_words() const { return static_cast<int>(word_boundaries.size()); }
};

// Greedy longest-match-first subword split of a lower-cased word. Falls back
// to the single unk piece when no prefix matches or the word exceeds
// kMaxWordChars.
std::vector<std::string> tokenize_word(std::string_view word, const Vocabulary& vocab);

// Tokenizes each word and repeats its tag once per piece.
TaggedSequence tokenize_tagged(const std::vector<std::string>& words,
                               const std::vector<int>& word_tags,
                               const Vocabulary& vocab,
                               const TagScheme& scheme);

// Inverse of tokenization: continuation pieces are folded back onto their
// root with markers stripped.
std::vector<std::string> detokenize(const std::vector<std::string>& pieces);

}  // namespace topics
