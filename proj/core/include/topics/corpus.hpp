#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "topics/gazetteer.hpp"
#include "topics/tokenizer.hpp"

namespace topics {

inline constexpr int kDefaultEmbedDim = 1024;

struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> words;  // normalize_words(text)
  std::vector<float> vec;          // unit-norm hashed bag-of-words

  static Document make(std::string id, std::string text);
};

// Feature-hashed bag-of-words, L2-normalized. Deterministic in the word list.
std::vector<float> embed_document(const std::vector<std::string>& words, int dim);

double cosine(const std::vector<float>& a, const std::vector<float>& b);

// Order-preserving near-duplicate removal: the earliest document of each
// group at or above the similarity threshold survives.
std::vector<Document> dedup(const std::vector<Document>& docs, double threshold);

// Greedy set cover over word n-grams in [ngram_min, ngram_max]; ties go to
// the earliest document. Output covers the corpus's full n-gram set.
std::vector<Document> select_min_cover(const std::vector<Document>& docs,
                                       int ngram_min, int ngram_max);

std::vector<std::string> doc_ngrams(const std::vector<std::string>& words,
                                    int ngram_min, int ngram_max);

struct ManifestEntry {
  std::string id;
  int n_records = 0;
  int n_pieces = 0;
};

// normalize -> weak_label -> tokenize_tagged -> chunk at word boundaries.
// Documents containing a single word longer than seq_len pieces are skipped
// with a warning on stderr.
std::vector<TaggedSequence> emit_parallel_corpus(const std::vector<Document>& docs,
                                                 const Gazetteer& gaz,
                                                 const Vocabulary& vocab,
                                                 const TagScheme& scheme,
                                                 int seq_len,
                                                 std::vector<ManifestEntry>* manifest = nullptr);

// Splits one tagged sequence into chunks of at most seq_len pieces, cutting
// only at word boundaries. Returns empty if some word alone exceeds seq_len.
std::vector<TaggedSequence> chunk_sequence(const TaggedSequence& seq, int seq_len);

// CoNLL-style corpus file: one "piece<TAB>tag" per line, blank line between
// records.
void write_conll(std::ostream& out, const std::vector<TaggedSequence>& records,
                 const TagScheme& scheme);
std::vector<TaggedSequence> read_conll(std::istream& in, const Vocabulary& vocab,
                                       const TagScheme& scheme);

// Two-line-per-record variant: space-joined pieces, then space-joined tags.
void write_pairs(std::ostream& out, const std::vector<TaggedSequence>& records,
                 const TagScheme& scheme);

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);

}  // namespace topics
