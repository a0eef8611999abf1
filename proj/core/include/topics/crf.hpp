#pragma once

#include <span>
#include <utility>
#include <vector>

#include "topics/matrix.hpp"

namespace topics {

struct CrfParams {
  Matrix trans;             // trans(i, j) = score of tag i -> tag j
  std::vector<float> start; // score of starting in tag k
  std::vector<float> end;   // score of ending in tag k

  int n_tags() const { return trans.rows(); }
  static CrfParams zeros(int n_tags);
};

// start[y0] + sum_t E(t, y_t) + sum_{t>=1} trans(y_{t-1}, y_t) + end[y_last]
double path_score(const DMatrix& emissions, std::span<const int> tags,
                  const CrfParams& p);

// log sum over all K^T tag sequences of exp(path_score), via the log-space
// forward recursion.
double log_partition(const DMatrix& emissions, const CrfParams& p);

struct CrfGrads {
  double loss = 0.0;
  DMatrix d_emissions;
  DMatrix d_trans;
  std::vector<double> d_start;
  std::vector<double> d_end;
};

// Negative log-likelihood of the gold path and its exact gradients
// (forward-backward marginals minus gold indicators).
CrfGrads nll_and_gradients(const DMatrix& emissions, std::span<const int> gold,
                           const CrfParams& p);

// Highest-scoring tag sequence and its score; ties break toward the lowest
// tag index.
std::pair<std::vector<int>, double> viterbi(const DMatrix& emissions,
                                            const CrfParams& p);

double logsumexp(std::span<const double> xs);

}  // namespace topics
