#include <doctest.h>

#include <cstdio>
#include <random>
#include <sstream>

#include "topics/tagger.hpp"
#include "topics/text.hpp"

using namespace topics;

namespace {

Vocabulary demo_vocab() {
  return Vocabulary({"[unk]", "alpha", "beta", "gamma", "delta", "ep", "##si",
                     "##lon", "one", "two", "12", "34"});
}

TokenizedDoc one_piece_per_word_doc(int n_words, int vocab_size, std::uint64_t seed) {
  TokenizedDoc doc;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, vocab_size - 1);
  for (int w = 0; w < n_words; ++w) {
    doc.words.push_back("w" + std::to_string(w));
    doc.pieces.push_back(doc.words.back());
    doc.piece_ids.push_back(dist(rng));
    doc.word_boundaries.push_back(w);
    doc.word_of_piece.push_back(w);
  }
  return doc;
}

bool same_intervals(const std::vector<Span>& a, const std::vector<Span>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("tokenize_doc aligns pieces, boundaries and covering words") {
  const auto vocab = demo_vocab();
  const auto doc = tokenize_doc({"alpha", "epsilon", "beta"}, vocab);
  CHECK(doc.pieces == std::vector<std::string>{"alpha", "ep", "##si", "##lon", "beta"});
  CHECK(doc.word_boundaries == std::vector<int>{0, 1, 4});
  CHECK(doc.word_of_piece == std::vector<int>{0, 1, 1, 1, 2});
}

TEST_CASE("extract_spans finds maximal non-outside runs") {
  const TagScheme scheme;
  const auto spans = extract_spans({"a", "b", "c", "d", "e"},
                                   {0, 1, 1, 0, 1}, scheme);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].text == "b c");
  CHECK(spans[0].word_start == 1);
  CHECK(spans[0].word_end == 3);
  CHECK(spans[1].text == "e");
  CHECK_THROWS_AS(extract_spans({"a"}, {0, 1}, scheme), std::invalid_argument);
}

TEST_CASE("decode_window rejects empty and oversized input") {
  const auto vocab = demo_vocab();
  const TagScheme scheme;
  const auto model = TaggerModel::create(vocab, 4, 4, scheme, 4, 3);
  CHECK_THROWS_AS(decode_window(std::vector<int>{}, model), std::invalid_argument);
  CHECK_THROWS_AS(decode_window(std::vector<int>{0, 1, 2, 3, 4}, model),
                  std::invalid_argument);
  CHECK(decode_window(std::vector<int>{1, 2}, model).size() == 2);
}

TEST_CASE("sliding_infer on a short document equals a single window") {
  const auto vocab = demo_vocab();
  const TagScheme scheme;
  const auto model = TaggerModel::create(vocab, 8, 8, scheme, 16, 7);
  const auto doc = one_piece_per_word_doc(10, vocab.size(), 5);

  const auto tags = decode_window(doc.piece_ids, model);
  std::vector<int> word_tags(doc.words.size());
  for (std::size_t w = 0; w < doc.words.size(); ++w) word_tags[w] = tags[w];
  const auto expected = extract_spans(doc.words, word_tags, scheme);

  const auto spans = sliding_infer(doc, model, 4, SpanSource::kShortContext);
  CHECK(same_intervals(spans, expected));
  CHECK_THROWS_AS(sliding_infer(doc, model, 0, SpanSource::kShortContext),
                  std::invalid_argument);
  CHECK_THROWS_AS(sliding_infer(doc, model, 17, SpanSource::kShortContext),
                  std::invalid_argument);
}

TEST_CASE("sliding_infer trims window-cut spans to whole words") {
  // Window length 2 over [alpha][ep ##si ##lon]: the second window starts
  // mid-word, so any NER there must not produce a partial-word span.
  const auto vocab = demo_vocab();
  const TagScheme scheme;
  const auto model = TaggerModel::create(vocab, 4, 4, scheme, 2, 11);
  const auto doc = tokenize_doc({"alpha", "epsilon"}, vocab);
  const auto spans = sliding_infer(doc, model, 1, SpanSource::kLongContext);
  for (const auto& s : spans) {
    CHECK(s.word_start >= 0);
    CHECK(s.word_end <= 2);
    CHECK(s.word_start < s.word_end);
    // Span text must be whole words from the document.
    const auto joined = join_words(doc.words, static_cast<std::size_t>(s.word_start),
                                   static_cast<std::size_t>(s.word_end));
    CHECK(s.text == joined);
  }
}

TEST_CASE("dual_union merges overlapping intervals and marks their source") {
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
  const std::vector<Span> a{Span{"b c", 1, 3, SpanSource::kLongContext}};
  const std::vector<Span> b{Span{"c d", 2, 4, SpanSource::kShortContext}};
  const auto merged = dual_union(a, b, words);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].text == "b c d");
  CHECK(merged[0].word_start == 1);
  CHECK(merged[0].word_end == 4);
  CHECK(merged[0].source == SpanSource::kMerged);
}

TEST_CASE("dual_union keeps adjacent intervals separate") {
  const std::vector<std::string> words{"a", "b", "c", "d"};
  const std::vector<Span> a{Span{"a b", 0, 2, SpanSource::kLongContext}};
  const std::vector<Span> b{Span{"c d", 2, 4, SpanSource::kShortContext}};
  const auto merged = dual_union(a, b, words);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].text == "a b");
  CHECK(merged[1].text == "c d");
  CHECK(merged[0].source == SpanSource::kLongContext);
  CHECK(merged[1].source == SpanSource::kShortContext);
}

TEST_CASE("dual_union keeps the source of identical intervals") {
  const std::vector<std::string> words{"a", "b"};
  const std::vector<Span> a{Span{"a b", 0, 2, SpanSource::kLongContext}};
  const auto merged = dual_union(a, a, words);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].source == SpanSource::kLongContext);
}

TEST_CASE("drop_numeric_spans removes all-numeric spans only") {
  std::vector<Span> spans{Span{"12 34", 0, 2, SpanSource::kMerged},
                          Span{"alpha 12", 2, 4, SpanSource::kMerged},
                          Span{"alpha", 4, 5, SpanSource::kMerged}};
  const auto kept = drop_numeric_spans(std::move(spans));
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].text == "alpha 12");
  CHECK(kept[1].text == "alpha");
}

TEST_CASE("model save/load round trips every tensor bit-exactly") {
  const auto vocab = demo_vocab();
  const TagScheme scheme;
  const auto model = TaggerModel::create(vocab, 6, 5, scheme, 32, 77);
  const std::string path = "test_model_roundtrip.tpsq";
  save_model(model, path);
  const auto back = load_model(path, vocab);

  CHECK(back.encoder.table().data() == model.encoder.table().data());
  CHECK(back.gru.fwd.w_z.data() == model.gru.fwd.w_z.data());
  CHECK(back.gru.fwd.u_h.data() == model.gru.fwd.u_h.data());
  CHECK(back.gru.bwd.w_r.data() == model.gru.bwd.w_r.data());
  CHECK(back.gru.bwd.b_h == model.gru.bwd.b_h);
  CHECK(back.gru.proj_w.data() == model.gru.proj_w.data());
  CHECK(back.gru.proj_b == model.gru.proj_b);
  CHECK(back.crf.trans.data() == model.crf.trans.data());
  CHECK(back.crf.start == model.crf.start);
  CHECK(back.crf.end == model.crf.end);
  CHECK(back.scheme.labels == model.scheme.labels);
  CHECK(back.seq_len == 32);
  CHECK(back.vocab_fingerprint == vocab.fingerprint());
  std::remove(path.c_str());
}

TEST_CASE("loading with a different vocabulary is rejected") {
  const auto vocab = demo_vocab();
  const TagScheme scheme;
  const auto model = TaggerModel::create(vocab, 4, 4, scheme, 16, 1);
  const std::string path = "test_model_fingerprint.tpsq";
  save_model(model, path);
  const Vocabulary other({"[unk]", "different"});
  CHECK_THROWS_AS(load_model(path, other), incompatible_model_error);
  std::remove(path.c_str());
}

TEST_CASE("load_model rejects garbage files") {
  const std::string path = "test_model_garbage.tpsq";
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("not a model", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_model(path), incompatible_model_error);
  std::remove(path.c_str());
}

TEST_CASE("train validates its inputs") {
  const auto vocab = demo_vocab();
  const TagScheme scheme;
  auto model = TaggerModel::create(vocab, 4, 4, scheme, 4, 1);
  TrainConfig cfg;
  CHECK_THROWS_AS(train({}, cfg, model), std::invalid_argument);

  TaggedSequence too_long;
  for (int i = 0; i < 5; ++i) {
    too_long.pieces.push_back("alpha");
    too_long.piece_ids.push_back(1);
    too_long.tags.push_back(0);
    too_long.word_boundaries.push_back(i);
  }
  CHECK_THROWS_AS(train({too_long}, cfg, model), std::invalid_argument);

  cfg.eval_fraction = 0.0f;
  TaggedSequence ok;
  ok.pieces = {"alpha"};
  ok.piece_ids = {1};
  ok.tags = {0};
  ok.word_boundaries = {0};
  CHECK_THROWS_AS(train({ok}, cfg, model), std::invalid_argument);
}

TEST_CASE("training on a separable toy corpus is deterministic and learns") {
  const auto vocab = demo_vocab();
  const TagScheme scheme;
  // Topic words: one, two. Background: alpha..delta.
  std::vector<TaggedSequence> corpus;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> bg(1, 4);
  for (int i = 0; i < 60; ++i) {
    TaggedSequence rec;
    for (int t = 0; t < 6; ++t) {
      const bool topic = t == (i % 5);
      const int id = topic ? 8 + (i % 2) : bg(rng);
      rec.pieces.push_back(vocab.piece(id));
      rec.piece_ids.push_back(id);
      rec.tags.push_back(topic ? 1 : 0);
      rec.word_boundaries.push_back(t);
    }
    corpus.push_back(std::move(rec));
  }

  TrainConfig cfg;
  cfg.max_epochs = 12;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.2f;
  cfg.seed = 5;
  cfg.precision_stop = 1.1f;  // disable early stopping for a fixed-length run

  auto model_a = TaggerModel::create(vocab, 8, 8, scheme, 8, 9);
  const auto metrics_a = train(corpus, cfg, model_a);
  auto model_b = TaggerModel::create(vocab, 8, 8, scheme, 8, 9);
  const auto metrics_b = train(corpus, cfg, model_b);

  REQUIRE(!metrics_a.empty());
  CHECK(metrics_a.size() == metrics_b.size());
  CHECK(metrics_a.back().mean_nll == metrics_b.back().mean_nll);
  CHECK(model_a.gru.fwd.w_z.data() == model_b.gru.fwd.w_z.data());
  CHECK(model_a.crf.trans.data() == model_b.crf.trans.data());
  CHECK(model_a.encoder.table().data() == model_b.encoder.table().data());
  // The loss must improve over the run on this trivially separable data.
  CHECK(metrics_a.back().mean_nll < metrics_a.front().mean_nll);
}

TEST_CASE("write_metrics_log emits one JSON object per epoch") {
  std::stringstream ss;
  write_metrics_log(ss, {EpochMetrics{1, 2.5, 0.5, 0.25}});
  CHECK(ss.str() ==
        "{\"epoch\":1,\"mean_nll\":2.5,\"precision\":0.5,\"recall\":0.25}\n");
}

TEST_CASE("span_source_name covers all sources") {
  CHECK(std::string(span_source_name(SpanSource::kLongContext)) == "long-context");
  CHECK(std::string(span_source_name(SpanSource::kShortContext)) == "short-context");
  CHECK(std::string(span_source_name(SpanSource::kMerged)) == "merged");
}
