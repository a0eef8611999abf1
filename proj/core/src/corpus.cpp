#include "topics/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "topics/text.hpp"

namespace topics {

Document Document::make(std::string id, std::string text) {
  Document d;
  d.id = std::move(id);
  d.words = normalize_words(text);
  d.text = std::move(text);
  return d;
}

std::vector<float> embed_document(const std::vector<std::string>& words, int dim) {
  if (words.empty()) throw std::invalid_argument("embed_document: empty document");
  if (dim < 1) throw std::invalid_argument("embed_document: bad dimension");
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  for (const auto& w : words) {
    const std::uint64_t h = fnv1a(w);
    const std::size_t idx = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim));
    const double sign = ((h >> 32) & 1ull) ? 1.0 : -1.0;
    acc[idx] += sign;
  }
  double norm_sq = 0.0;
  for (double v : acc) norm_sq += v * v;
  const double inv = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
  std::vector<float> out(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  if (a == b) return 1.0;  // exact duplicates stay duplicates under any threshold
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

std::vector<Document> dedup(const std::vector<Document>& docs, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw std::invalid_argument("dedup: threshold must be in [0,1]");
  }
  std::vector<Document> kept;
  for (const auto& doc : docs) {
    bool duplicate = false;
    for (const auto& k : kept) {
      if (cosine(doc.vec, k.vec) >= threshold) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(doc);
  }
  return kept;
}

std::vector<std::string> doc_ngrams(const std::vector<std::string>& words,
                                    int ngram_min, int ngram_max) {
  std::set<std::string> grams;
  const int n_words = static_cast<int>(words.size());
  for (int n = ngram_min; n <= ngram_max; ++n) {
    for (int i = 0; i + n <= n_words; ++i) {
      grams.insert(join_words(words, static_cast<std::size_t>(i),
                              static_cast<std::size_t>(i + n)));
    }
  }
  return {grams.begin(), grams.end()};
}

std::vector<Document> select_min_cover(const std::vector<Document>& docs,
                                       int ngram_min, int ngram_max) {
  if (docs.empty()) throw std::invalid_argument("select_min_cover: empty corpus");
  std::vector<std::set<std::string>> grams;
  grams.reserve(docs.size());
  std::set<std::string> uncovered;
  for (const auto& doc : docs) {
    auto g = doc_ngrams(doc.words, ngram_min, ngram_max);
    uncovered.insert(g.begin(), g.end());
    grams.emplace_back(g.begin(), g.end());
  }

  std::vector<bool> taken(docs.size(), false);
  std::vector<std::size_t> picked;
  while (!uncovered.empty()) {
    std::size_t best = docs.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (taken[i]) continue;
      std::size_t gain = 0;
      for (const auto& g : grams[i]) gain += uncovered.count(g);
      if (gain > best_gain) {  // ties keep the earliest document
        best_gain = gain;
        best = i;
      }
    }
    if (best == docs.size()) break;  // nothing left contributes
    taken[best] = true;
    picked.push_back(best);
    for (const auto& g : grams[best]) uncovered.erase(g);
  }
  std::sort(picked.begin(), picked.end());
  std::vector<Document> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(docs[i]);
  return out;
}

std::vector<TaggedSequence> chunk_sequence(const TaggedSequence& seq, int seq_len) {
  if (seq_len < 1) throw std::invalid_argument("chunk_sequence: bad seq_len");
  std::vector<TaggedSequence> chunks;
  const int n_words = seq.n_words();
  int w = 0;
  while (w < n_words) {
    const int chunk_start = seq.word_boundaries[static_cast<std::size_t>(w)];
    int w_end = w;
    int piece_end = chunk_start;
    while (w_end < n_words) {
      const int next_end = w_end + 1 < n_words
                               ? seq.word_boundaries[static_cast<std::size_t>(w_end + 1)]
                               : seq.size();
      if (next_end - chunk_start > seq_len) break;
      piece_end = next_end;
      ++w_end;
    }
    if (w_end == w) return {};  // a single word exceeds seq_len pieces
    TaggedSequence chunk;
    for (int p = chunk_start; p < piece_end; ++p) {
      chunk.pieces.push_back(seq.pieces[static_cast<std::size_t>(p)]);
      chunk.piece_ids.push_back(seq.piece_ids[static_cast<std::size_t>(p)]);
      chunk.tags.push_back(seq.tags[static_cast<std::size_t>(p)]);
    }
    for (int i = w; i < w_end; ++i) {
      chunk.word_boundaries.push_back(seq.word_boundaries[static_cast<std::size_t>(i)] - chunk_start);
    }
    chunks.push_back(std::move(chunk));
    w = w_end;
  }
  return chunks;
}

std::vector<TaggedSequence> emit_parallel_corpus(const std::vector<Document>& docs,
                                                 const Gazetteer& gaz,
                                                 const Vocabulary& vocab,
                                                 const TagScheme& scheme,
                                                 int seq_len,
                                                 std::vector<ManifestEntry>* manifest) {
  std::vector<TaggedSequence> records;
  for (const auto& doc : docs) {
    ManifestEntry entry{doc.id, 0, 0};
    if (!doc.words.empty()) {
      const std::vector<int> tags = gaz.weak_label(doc.words, scheme);
      const TaggedSequence seq = tokenize_tagged(doc.words, tags, vocab, scheme);
      auto chunks = chunk_sequence(seq, seq_len);
      if (chunks.empty() && seq.size() > 0) {
        std::cerr << "warning: document " << doc.id
                  << " has a word longer than seq_len pieces; record skipped\n";
      }
      for (auto& chunk : chunks) {
        entry.n_records += 1;
        entry.n_pieces += chunk.size();
        records.push_back(std::move(chunk));
      }
    }
    if (manifest) manifest->push_back(std::move(entry));
  }
  return records;
}

void write_conll(std::ostream& out, const std::vector<TaggedSequence>& records,
                 const TagScheme& scheme) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0) out << '\n';
    const auto& rec = records[i];
    for (int t = 0; t < rec.size(); ++t) {
      out << rec.pieces[static_cast<std::size_t>(t)] << '\t'
          << scheme.labels[static_cast<std::size_t>(rec.tags[static_cast<std::size_t>(t)])] << '\n';
    }
  }
}

std::vector<TaggedSequence> read_conll(std::istream& in, const Vocabulary& vocab,
                                       const TagScheme& scheme) {
  std::vector<TaggedSequence> records;
  TaggedSequence cur;
  auto flush = [&] {
    if (cur.size() > 0) records.push_back(std::move(cur));
    cur = TaggedSequence{};
  };
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::invalid_argument("read_conll: malformed line: " + line);
    }
    std::string piece = line.substr(0, tab);
    const int tag = scheme.id_of(line.substr(tab + 1));
    if (tag < 0) throw std::invalid_argument("read_conll: unknown tag in line: " + line);
    int id = vocab.id_of(piece);
    if (id < 0) id = vocab.unk_id();
    if (!is_continuation_piece(piece)) cur.word_boundaries.push_back(cur.size());
    cur.pieces.push_back(std::move(piece));
    cur.piece_ids.push_back(id);
    cur.tags.push_back(tag);
  }
  flush();
  return records;
}

void write_pairs(std::ostream& out, const std::vector<TaggedSequence>& records,
                 const TagScheme& scheme) {
  for (const auto& rec : records) {
    for (int t = 0; t < rec.size(); ++t) {
      if (t > 0) out << ' ';
      out << rec.pieces[static_cast<std::size_t>(t)];
    }
    out << '\n';
    for (int t = 0; t < rec.size(); ++t) {
      if (t > 0) out << ' ';
      out << scheme.labels[static_cast<std::size_t>(rec.tags[static_cast<std::size_t>(t)])];
    }
    out << '\n';
  }
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  for (const auto& e : entries) {
    nlohmann::json j{{"id", e.id}, {"n_records", e.n_records}, {"n_pieces", e.n_pieces}};
    out << j.dump() << '\n';
  }
}

}  // namespace topics
