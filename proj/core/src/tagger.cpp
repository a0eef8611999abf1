#include "topics/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "topics/text.hpp"

namespace topics {
namespace {

std::vector<int> run_viterbi(std::span<const int> piece_ids, const TaggerModel& m) {
  const DMatrix x = m.encoder.encode(piece_ids);
  const DMatrix h = bigru_forward(x, m.gru);
  const DMatrix e = emissions(h, m.gru);
  return viterbi(e, m.crf).first;
}

struct Interval {
  int start;
  int end;
  SpanSource source;
};

std::vector<Interval> merge_intervals(std::vector<Interval> intervals, bool mark_merged) {
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.start < out.back().end) {  // strict overlap only
      auto& cur = out.back();
      const bool identical =
          iv.start == cur.start && iv.end == cur.end && iv.source == cur.source;
      if (mark_merged && !identical) cur.source = SpanSource::kMerged;
      cur.end = std::max(cur.end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

std::vector<Span> intervals_to_spans(const std::vector<Interval>& intervals,
                                     const std::vector<std::string>& words) {
  std::vector<Span> spans;
  spans.reserve(intervals.size());
  for (const auto& iv : intervals) {
    spans.push_back(Span{join_words(words, static_cast<std::size_t>(iv.start),
                                    static_cast<std::size_t>(iv.end)),
                         iv.start, iv.end, iv.source});
  }
  return spans;
}

}  // namespace

TaggerModel TaggerModel::create(const Vocabulary& vocab, int embed_dim, int hidden_dim,
                                const TagScheme& scheme, int seq_len, std::uint64_t seed) {
  if (seq_len < 2) throw std::invalid_argument("TaggerModel: seq_len must be >= 2");
  TaggerModel m;
  m.encoder = Encoder::lookup(vocab.size(), embed_dim, seed);
  m.gru = GruParams::init(embed_dim, hidden_dim, scheme.n_tags(), seed + 1000);
  m.crf = CrfParams::zeros(scheme.n_tags());
  m.scheme = scheme;
  m.seq_len = seq_len;
  m.vocab_fingerprint = vocab.fingerprint();
  return m;
}

TaggerModel TaggerModel::create_precomputed(const std::string& embedding_file, int hidden_dim,
                                            const TagScheme& scheme, int seq_len,
                                            const std::string& vocab_fingerprint,
                                            std::uint64_t seed) {
  if (seq_len < 2) throw std::invalid_argument("TaggerModel: seq_len must be >= 2");
  TaggerModel m;
  m.encoder = Encoder::precomputed(embedding_file);
  m.gru = GruParams::init(m.encoder.embed_dim(), hidden_dim, scheme.n_tags(), seed + 1000);
  m.crf = CrfParams::zeros(scheme.n_tags());
  m.scheme = scheme;
  m.seq_len = seq_len;
  m.vocab_fingerprint = vocab_fingerprint;
  return m;
}

std::vector<EpochMetrics> train(const std::vector<TaggedSequence>& corpus,
                                const TrainConfig& cfg, TaggerModel& model) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  if (cfg.eval_fraction <= 0.0f || cfg.eval_fraction >= 1.0f) {
    throw std::invalid_argument("train: eval_fraction must be in (0,1)");
  }
  if (cfg.max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  for (const auto& rec : corpus) {
    if (rec.size() > model.seq_len) {
      throw std::invalid_argument("train: record longer than model seq_len");
    }
    if (rec.size() == 0) throw std::invalid_argument("train: empty record");
  }

  const int n = static_cast<int>(corpus.size());
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  int eval_n = static_cast<int>(std::lround(cfg.eval_fraction * n));
  eval_n = std::clamp(eval_n, 1, n - 1 > 0 ? n - 1 : 1);
  std::vector<int> eval_idx(order.begin(), order.begin() + eval_n);
  std::vector<int> train_idx(order.begin() + eval_n, order.end());
  if (train_idx.empty()) train_idx = eval_idx;  // degenerate one-record corpus

  const int outside = model.scheme.outside_id();
  const bool trainable_encoder = model.encoder.trainable();
  std::vector<EpochMetrics> metrics;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double loss_sum = 0.0;
    int loss_count = 0;

    for (std::size_t b = 0; b < train_idx.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t b_end = std::min(train_idx.size(), b + static_cast<std::size_t>(cfg.batch_size));
      const float inv_batch = 1.0f / static_cast<float>(b_end - b);

      GruGrads batch_grads = GruGrads::zeros(model.gru);
      DMatrix table_grads;
      if (trainable_encoder) {
        table_grads = DMatrix(model.encoder.table().rows(), model.encoder.table().cols());
      }
      DMatrix d_trans(model.crf.n_tags(), model.crf.n_tags());
      std::vector<double> d_start(static_cast<std::size_t>(model.crf.n_tags()), 0.0);
      std::vector<double> d_end(static_cast<std::size_t>(model.crf.n_tags()), 0.0);

      for (std::size_t i = b; i < b_end; ++i) {
        const TaggedSequence& rec = corpus[static_cast<std::size_t>(train_idx[i])];
        const DMatrix x = model.encoder.encode(rec.piece_ids);
        GruCache cache;
        const DMatrix h = bigru_forward(x, model.gru, &cache);
        const DMatrix e = emissions(h, model.gru);
        CrfGrads cg = nll_and_gradients(e, rec.tags, model.crf);
        loss_sum += cg.loss;
        ++loss_count;

        GruGrads g = backward(cg.d_emissions, cache, model.gru);
        batch_grads.accumulate(g);
        d_trans.add_scaled(cg.d_trans, 1.0);
        for (std::size_t k = 0; k < d_start.size(); ++k) {
          d_start[k] += cg.d_start[k];
          d_end[k] += cg.d_end[k];
        }
        if (trainable_encoder) {
          for (int t = 0; t < g.input.rows(); ++t) {
            const int id = rec.piece_ids[static_cast<std::size_t>(t)];
            double* dst = table_grads.row(id);
            const double* src = g.input.row(t);
            for (int c = 0; c < g.input.cols(); ++c) dst[c] += src[c];
          }
        }
      }

      const float step = cfg.learning_rate * inv_batch;
      apply_sgd(model.gru, batch_grads, step);
      model.crf.trans.add_scaled(d_trans, -step);
      for (std::size_t k = 0; k < d_start.size(); ++k) {
        model.crf.start[k] -= static_cast<float>(step * d_start[k]);
        model.crf.end[k] -= static_cast<float>(step * d_end[k]);
      }
      if (trainable_encoder) model.encoder.table().add_scaled(table_grads, -step);
    }

    const double mean_nll = loss_count > 0 ? loss_sum / loss_count : 0.0;
    if (!std::isfinite(mean_nll)) {
      throw training_diverged_error("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
    }

    // token-level precision/recall of non-outside tags on the held-out split
    long tp = 0, fp = 0, fn = 0;
    for (int idx : eval_idx) {
      const TaggedSequence& rec = corpus[static_cast<std::size_t>(idx)];
      const std::vector<int> pred = run_viterbi(rec.piece_ids, model);
      for (std::size_t t = 0; t < pred.size(); ++t) {
        const bool gold_pos = rec.tags[t] != outside;
        const bool pred_pos = pred[t] != outside;
        if (pred_pos && gold_pos) ++tp;
        else if (pred_pos) ++fp;
        else if (gold_pos) ++fn;
      }
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    metrics.push_back(EpochMetrics{epoch, mean_nll, precision, recall});
    if (precision >= cfg.precision_stop && recall >= cfg.recall_stop) break;
  }
  return metrics;
}

std::vector<int> decode_window(std::span<const int> piece_ids, const TaggerModel& model) {
  if (piece_ids.empty()) throw std::invalid_argument("decode_window: empty input");
  if (static_cast<int>(piece_ids.size()) > model.seq_len) {
    throw std::invalid_argument("decode_window: input longer than seq_len");
  }
  return run_viterbi(piece_ids, model);
}

TokenizedDoc tokenize_doc(const std::vector<std::string>& words, const Vocabulary& vocab) {
  TokenizedDoc doc;
  doc.words = words;
  for (std::size_t w = 0; w < words.size(); ++w) {
    doc.word_boundaries.push_back(static_cast<int>(doc.pieces.size()));
    for (auto& piece : tokenize_word(words[w], vocab)) {
      doc.piece_ids.push_back(vocab.id_of(piece));
      doc.pieces.push_back(std::move(piece));
      doc.word_of_piece.push_back(static_cast<int>(w));
    }
  }
  return doc;
}

const char* span_source_name(SpanSource s) {
  switch (s) {
    case SpanSource::kLongContext: return "long-context";
    case SpanSource::kShortContext: return "short-context";
    case SpanSource::kMerged: return "merged";
  }
  return "merged";
}

std::vector<Span> extract_spans(const std::vector<std::string>& words,
                                const std::vector<int>& word_tags,
                                const TagScheme& scheme) {
  if (words.size() != word_tags.size()) {
    throw std::invalid_argument("extract_spans: words/tags length mismatch");
  }
  const int outside = scheme.outside_id();
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < words.size()) {
    if (word_tags[i] == outside) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < words.size() && word_tags[j] != outside) ++j;
    spans.push_back(Span{join_words(words, i, j), static_cast<int>(i),
                         static_cast<int>(j), SpanSource::kShortContext});
    i = j;
  }
  return spans;
}

std::vector<Span> sliding_infer(const TokenizedDoc& doc, const TaggerModel& model,
                                int stride, SpanSource source) {
  if (stride < 1 || stride > model.seq_len) {
    throw std::invalid_argument("sliding_infer: stride must be in [1, seq_len]");
  }
  const int n_pieces = static_cast<int>(doc.pieces.size());
  if (n_pieces == 0) return {};
  const int window = model.seq_len;

  std::vector<int> offsets;
  if (n_pieces <= window) {
    offsets.push_back(0);
  } else {
    int o = 0;
    while (o + window < n_pieces) {
      offsets.push_back(o);
      o += stride;
    }
    offsets.push_back(n_pieces - window);  // right-aligned tail window
  }

  const int outside = model.scheme.outside_id();
  const int n_words = static_cast<int>(doc.words.size());
  std::vector<Interval> intervals;
  for (int off : offsets) {
    const int len = std::min(window, n_pieces - off);
    const std::span<const int> ids(doc.piece_ids.data() + off, static_cast<std::size_t>(len));
    const std::vector<int> tags = decode_window(ids, model);
    int t = 0;
    while (t < len) {
      if (tags[static_cast<std::size_t>(t)] == outside) {
        ++t;
        continue;
      }
      int u = t;
      while (u < len && tags[static_cast<std::size_t>(u)] != outside) ++u;
      // global piece range [a, b); trim both edges to word boundaries
      const int a = off + t;
      const int b = off + u;
      int w_start = doc.word_of_piece[static_cast<std::size_t>(a)];
      if (doc.word_boundaries[static_cast<std::size_t>(w_start)] != a) ++w_start;
      const int w_last = doc.word_of_piece[static_cast<std::size_t>(b - 1)];
      const int w_last_end = w_last + 1 < n_words
                                 ? doc.word_boundaries[static_cast<std::size_t>(w_last + 1)]
                                 : n_pieces;
      const int w_end = w_last_end == b ? w_last + 1 : w_last;
      if (w_start < w_end) intervals.push_back(Interval{w_start, w_end, source});
      t = u;
    }
  }
  return intervals_to_spans(merge_intervals(std::move(intervals), false), doc.words);
}

std::vector<Span> dual_union(const std::vector<Span>& a, const std::vector<Span>& b,
                             const std::vector<std::string>& words) {
  std::vector<Interval> intervals;
  intervals.reserve(a.size() + b.size());
  for (const auto& s : a) intervals.push_back(Interval{s.word_start, s.word_end, s.source});
  for (const auto& s : b) intervals.push_back(Interval{s.word_start, s.word_end, s.source});
  return intervals_to_spans(merge_intervals(std::move(intervals), true), words);
}

std::vector<Span> drop_numeric_spans(std::vector<Span> spans) {
  std::erase_if(spans, [](const Span& s) {
    const auto words = split_ws(s.text);
    return !words.empty() &&
           std::all_of(words.begin(), words.end(),
                       [](const std::string& w) { return is_numeric_token(w); });
  });
  return spans;
}

void write_metrics_log(std::ostream& out, const std::vector<EpochMetrics>& metrics) {
  for (const auto& m : metrics) {
    nlohmann::json j{{"epoch", m.epoch},
                     {"mean_nll", m.mean_nll},
                     {"precision", m.precision},
                     {"recall", m.recall}};
    out << j.dump() << '\n';
  }
}

}  // namespace topics
