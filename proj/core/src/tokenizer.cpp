#include "topics/tokenizer.hpp"

#include <fstream>
#include <stdexcept>

#include "topics/text.hpp"

namespace topics {

Vocabulary::Vocabulary(std::vector<std::string> pieces, std::string unk_piece)
    : pieces_(std::move(pieces)) {
  ids_.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    auto [it, inserted] = ids_.emplace(pieces_[i], static_cast<int>(i));
    if (!inserted) {
      throw std::invalid_argument("duplicate vocabulary piece: " + pieces_[i]);
    }
  }
  auto it = ids_.find(unk_piece);
  if (it == ids_.end()) {
    throw std::invalid_argument("unk piece \"" + unk_piece + "\" not in vocabulary");
  }
  unk_id_ = it->second;
}

Vocabulary Vocabulary::load(const std::string& path, std::string unk_piece) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open vocabulary file: " + path);
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  return Vocabulary(std::move(pieces), std::move(unk_piece));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  for (const auto& p : pieces_) out << p << '\n';
}

int Vocabulary::id_of(const std::string& piece) const {
  auto it = ids_.find(piece);
  return it == ids_.end() ? -1 : it->second;
}

std::string Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a("");
  for (const auto& p : pieces_) {
    h = fnv1a(p, h);
    h = fnv1a("\n", h);
  }
  return to_hex(h);
}

int TagScheme::outside_id() const {
  int id = id_of(outside_label);
  if (id < 0) throw std::invalid_argument("outside label not in tag scheme");
  return id;
}

int TagScheme::id_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> tokenize_word(std::string_view word, const Vocabulary& vocab) {
  if (word.empty()) throw std::invalid_argument("tokenize_word: empty word");
  for (char c : word) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("tokenize_word: word contains whitespace");
    }
    if (c >= 'A' && c <= 'Z') {
      throw std::invalid_argument("tokenize_word: input must be lower-cased");
    }
  }
  if (word.size() > kMaxWordChars) return {vocab.unk_piece()};

  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    int found = -1;
    std::string candidate;
    while (end > start) {
      candidate.assign(start > 0 ? "##" : "");
      candidate.append(word.substr(start, end - start));
      found = vocab.id_of(candidate);
      if (found >= 0) break;
      --end;
    }
    if (found < 0) return {vocab.unk_piece()};
    pieces.push_back(std::move(candidate));
    start = end;
  }
  return pieces;
}

TaggedSequence tokenize_tagged(const std::vector<std::string>& words,
                               const std::vector<int>& word_tags,
                               const Vocabulary& vocab,
                               const TagScheme& scheme) {
  if (words.size() != word_tags.size()) {
    throw std::invalid_argument("tokenize_tagged: words/tags length mismatch");
  }
  TaggedSequence seq;
  for (std::size_t w = 0; w < words.size(); ++w) {
    int tag = word_tags[w];
    if (tag < 0 || tag >= scheme.n_tags()) {
      throw std::invalid_argument("tokenize_tagged: tag id out of range");
    }
    seq.word_boundaries.push_back(seq.size());
    for (auto& piece : tokenize_word(words[w], vocab)) {
      seq.piece_ids.push_back(vocab.id_of(piece));
      seq.pieces.push_back(std::move(piece));
      seq.tags.push_back(tag);
    }
  }
  return seq;
}

std::vector<std::string> detokenize(const std::vector<std::string>& pieces) {
  std::vector<std::string> words;
  for (const auto& piece : pieces) {
    if (is_continuation_piece(piece)) {
      if (words.empty()) {
        throw std::invalid_argument("detokenize: leading continuation piece");
      }
      words.back().append(piece.substr(2));
    } else {
      words.push_back(piece);
    }
  }
  return words;
}

}  // namespace topics
