#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "topics/crf.hpp"
#include "topics/neural.hpp"
#include "topics/tokenizer.hpp"

namespace topics {

struct incompatible_model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct training_diverged_error : std::runtime_error {
  training_diverged_error(const std::string& what, int epoch_index)
      : std::runtime_error(what), epoch(epoch_index) {}
  int epoch;
};

struct TaggerModel {
  Encoder encoder;
  GruParams gru;
  CrfParams crf;
  TagScheme scheme;
  int seq_len = 64;
  std::string vocab_fingerprint;

  static TaggerModel create(const Vocabulary& vocab, int embed_dim, int hidden_dim,
                            const TagScheme& scheme, int seq_len, std::uint64_t seed);
  static TaggerModel create_precomputed(const std::string& embedding_file, int hidden_dim,
                                        const TagScheme& scheme, int seq_len,
                                        const std::string& vocab_fingerprint,
                                        std::uint64_t seed);
};

struct TrainConfig {
  float learning_rate = 0.05f;
  int batch_size = 32;
  int max_epochs = 16;
  float precision_stop = 0.70f;
  float recall_stop = 0.90f;
  float eval_fraction = 0.10f;
  std::uint64_t seed = 1;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double mean_nll = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Mini-batch gradient descent on the CRF NLL. After each epoch, token-level
// precision/recall of the non-outside tag on the held-out split decides
// early stopping.
std::vector<EpochMetrics> train(const std::vector<TaggedSequence>& corpus,
                                const TrainConfig& cfg, TaggerModel& model);

// encode -> bigru -> emissions -> viterbi over one window.
std::vector<int> decode_window(std::span<const int> piece_ids, const TaggerModel& model);

struct TokenizedDoc {
  std::vector<std::string> words;
  std::vector<std::string> pieces;
  std::vector<int> piece_ids;
  std::vector<int> word_boundaries;  // first piece index of each word
  std::vector<int> word_of_piece;    // word index covering each piece
};

TokenizedDoc tokenize_doc(const std::vector<std::string>& words, const Vocabulary& vocab);

enum class SpanSource { kLongContext, kShortContext, kMerged };
const char* span_source_name(SpanSource s);

struct Span {
  std::string text;   // space-joined words of [word_start, word_end)
  int word_start = 0;
  int word_end = 0;   // exclusive
  SpanSource source = SpanSource::kShortContext;

  friend bool operator==(const Span& a, const Span& b) {
    return a.word_start == b.word_start && a.word_end == b.word_end && a.text == b.text;
  }
};

// Maximal runs of non-outside word tags become spans.
std::vector<Span> extract_spans(const std::vector<std::string>& words,
                                const std::vector<int>& word_tags,
                                const TagScheme& scheme);

// Moving-window Viterbi decoding; per-window NER runs are trimmed to word
// boundaries and merged across windows by interval union.
std::vector<Span> sliding_infer(const TokenizedDoc& doc, const TaggerModel& model,
                                int stride, SpanSource source);

// Union of two span sets from the same word sequence; overlapping intervals
// merge into the covering interval with source = merged.
std::vector<Span> dual_union(const std::vector<Span>& a, const std::vector<Span>& b,
                             const std::vector<std::string>& words);

// Drops spans made solely of numeric words.
std::vector<Span> drop_numeric_spans(std::vector<Span> spans);

// Model file: magic "TPSQ", u32 version, u32-length JSON metadata, then
// named little-endian f32 tensors with u32-length name prefixes.
void save_model(const TaggerModel& model, const std::string& path);
TaggerModel load_model(const std::string& path);
TaggerModel load_model(const std::string& path, const Vocabulary& vocab);

void write_metrics_log(std::ostream& out, const std::vector<EpochMetrics>& metrics);

}  // namespace topics
