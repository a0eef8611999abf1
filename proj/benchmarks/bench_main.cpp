#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "topics/corpus.hpp"
#include "topics/crf.hpp"
#include "topics/gazetteer.hpp"
#include "topics/neural.hpp"
#include "topics/tokenizer.hpp"

namespace {

topics::CrfParams random_crf(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  topics::CrfParams p = topics::CrfParams::zeros(k);
  for (float& v : p.trans.data()) v = dist(rng);
  for (float& v : p.start) v = dist(rng);
  for (float& v : p.end) v = dist(rng);
  return p;
}

topics::DMatrix random_emissions(int t_len, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  topics::DMatrix e(t_len, k);
  for (double& v : e.data()) v = dist(rng);
  return e;
}

void bm_crf_viterbi(benchmark::State& state) {
  const int t_len = static_cast<int>(state.range(0));
  const auto p = random_crf(2, 1);
  const auto e = random_emissions(t_len, 2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(topics::viterbi(e, p));
  }
  state.SetItemsProcessed(state.iterations() * t_len);
}
BENCHMARK(bm_crf_viterbi)->Arg(64)->Arg(512);

void bm_crf_nll_gradients(benchmark::State& state) {
  const int t_len = static_cast<int>(state.range(0));
  const auto p = random_crf(2, 3);
  const auto e = random_emissions(t_len, 2, 4);
  std::vector<int> gold(static_cast<std::size_t>(t_len));
  std::mt19937_64 rng(5);
  for (int& g : gold) g = static_cast<int>(rng() % 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(topics::nll_and_gradients(e, gold, p));
  }
  state.SetItemsProcessed(state.iterations() * t_len);
}
BENCHMARK(bm_crf_nll_gradients)->Arg(64)->Arg(512);

void bm_bigru_forward(benchmark::State& state) {
  const int t_len = static_cast<int>(state.range(0));
  const auto p = topics::GruParams::init(64, 64, 2, 6);
  topics::DMatrix input(t_len, 64);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : input.data()) v = dist(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(topics::bigru_forward(input, p));
  }
  state.SetItemsProcessed(state.iterations() * t_len);
}
BENCHMARK(bm_bigru_forward)->Arg(64)->Arg(256);

void bm_tokenize_word(benchmark::State& state) {
  const topics::Vocabulary vocab({"[unk]", "har", "##ass", "##ment", "##s",
                                  "inter", "##nation", "##al", "move"});
  for (auto _ : state) {
    benchmark::DoNotOptimize(topics::tokenize_word("harassments", vocab));
    benchmark::DoNotOptimize(topics::tokenize_word("international", vocab));
  }
  state.SetItemsProcessed(state.iterations() * 2);
}
BENCHMARK(bm_tokenize_word);

void bm_weak_label(benchmark::State& state) {
  std::vector<std::string> titles;
  for (int i = 0; i < 1000; ++i) {
    titles.push_back("topic" + std::to_string(i) + " phrase" + std::to_string(i));
  }
  const auto gaz = topics::Gazetteer::from_titles(titles);
  const topics::TagScheme scheme;
  std::vector<std::string> words;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    if (rng() % 10 == 0) {
      const int t = static_cast<int>(rng() % 1000);
      words.push_back("topic" + std::to_string(t));
      words.push_back("phrase" + std::to_string(t));
    } else {
      words.push_back("word" + std::to_string(rng() % 200));
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaz.weak_label(words, scheme));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(words.size()));
}
BENCHMARK(bm_weak_label);

void bm_embed_document(benchmark::State& state) {
  std::vector<std::string> words;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 400; ++i) words.push_back("w" + std::to_string(rng() % 5000));
  for (auto _ : state) {
    benchmark::DoNotOptimize(topics::embed_document(words, topics::kDefaultEmbedDim));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(words.size()));
}
BENCHMARK(bm_embed_document);

}  // namespace

BENCHMARK_MAIN();
