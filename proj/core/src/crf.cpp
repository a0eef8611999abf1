#include "topics/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace topics {
namespace {

void check_inputs(const DMatrix& emissions, const CrfParams& p) {
  if (emissions.rows() < 1) throw std::invalid_argument("crf: empty emission matrix");
  if (emissions.cols() != p.n_tags() || p.trans.cols() != p.n_tags() ||
      static_cast<int>(p.start.size()) != p.n_tags() ||
      static_cast<int>(p.end.size()) != p.n_tags()) {
    throw std::invalid_argument("crf: shape mismatch");
  }
}

// alpha(t, j) = E(t, j) + LSE_i(alpha(t-1, i) + trans(i, j)), log-space
std::vector<std::vector<double>> forward_lattice(const DMatrix& e, const CrfParams& p) {
  const int t_len = e.rows(), k = p.n_tags();
  std::vector<std::vector<double>> alpha(
      static_cast<std::size_t>(t_len), std::vector<double>(static_cast<std::size_t>(k)));
  for (int j = 0; j < k; ++j) alpha[0][static_cast<std::size_t>(j)] = p.start[static_cast<std::size_t>(j)] + e(0, j);
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int t = 1; t < t_len; ++t) {
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < k; ++i) {
        terms[static_cast<std::size_t>(i)] =
            alpha[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i)] + p.trans(i, j);
      }
      alpha[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = e(t, j) + logsumexp(terms);
    }
  }
  return alpha;
}

std::vector<std::vector<double>> backward_lattice(const DMatrix& e, const CrfParams& p) {
  const int t_len = e.rows(), k = p.n_tags();
  std::vector<std::vector<double>> beta(
      static_cast<std::size_t>(t_len), std::vector<double>(static_cast<std::size_t>(k)));
  for (int j = 0; j < k; ++j) beta[static_cast<std::size_t>(t_len - 1)][static_cast<std::size_t>(j)] = p.end[static_cast<std::size_t>(j)];
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int t = t_len - 2; t >= 0; --t) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        terms[static_cast<std::size_t>(j)] = p.trans(i, j) + e(t + 1, j) +
            beta[static_cast<std::size_t>(t + 1)][static_cast<std::size_t>(j)];
      }
      beta[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = logsumexp(terms);
    }
  }
  return beta;
}

}  // namespace

double logsumexp(std::span<const double> xs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

CrfParams CrfParams::zeros(int n_tags) {
  CrfParams p;
  p.trans = Matrix(n_tags, n_tags);
  p.start.assign(static_cast<std::size_t>(n_tags), 0.0f);
  p.end.assign(static_cast<std::size_t>(n_tags), 0.0f);
  return p;
}

double path_score(const DMatrix& emissions, std::span<const int> tags,
                  const CrfParams& p) {
  check_inputs(emissions, p);
  if (static_cast<int>(tags.size()) != emissions.rows()) {
    throw std::invalid_argument("path_score: tag sequence length mismatch");
  }
  for (int y : tags) {
    if (y < 0 || y >= p.n_tags()) throw std::invalid_argument("path_score: tag out of range");
  }
  double score = p.start[static_cast<std::size_t>(tags[0])];
  for (std::size_t t = 0; t < tags.size(); ++t) {
    score += emissions(static_cast<int>(t), tags[t]);
    if (t > 0) score += p.trans(tags[t - 1], tags[t]);
  }
  score += p.end[static_cast<std::size_t>(tags.back())];
  return score;
}

double log_partition(const DMatrix& emissions, const CrfParams& p) {
  check_inputs(emissions, p);
  auto alpha = forward_lattice(emissions, p);
  const int k = p.n_tags();
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    terms[static_cast<std::size_t>(j)] = alpha.back()[static_cast<std::size_t>(j)] + p.end[static_cast<std::size_t>(j)];
  }
  return logsumexp(terms);
}

CrfGrads nll_and_gradients(const DMatrix& emissions, std::span<const int> gold,
                           const CrfParams& p) {
  check_inputs(emissions, p);
  const int t_len = emissions.rows(), k = p.n_tags();
  if (static_cast<int>(gold.size()) != t_len) {
    throw std::invalid_argument("nll: gold length mismatch");
  }
  for (int y : gold) {
    if (y < 0 || y >= k) throw std::invalid_argument("nll: tag out of range");
  }

  auto alpha = forward_lattice(emissions, p);
  auto beta = backward_lattice(emissions, p);
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    terms[static_cast<std::size_t>(j)] = alpha.back()[static_cast<std::size_t>(j)] + p.end[static_cast<std::size_t>(j)];
  }
  const double log_z = logsumexp(terms);

  CrfGrads g;
  g.loss = log_z - path_score(emissions, gold, p);
  g.d_emissions = DMatrix(t_len, k);
  g.d_trans = DMatrix(k, k);
  g.d_start.assign(static_cast<std::size_t>(k), 0.0);
  g.d_end.assign(static_cast<std::size_t>(k), 0.0);

  // unary marginals
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < k; ++j) {
      const double m = std::exp(alpha[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] +
                                beta[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] - log_z);
      g.d_emissions(t, j) = m - (gold[static_cast<std::size_t>(t)] == j ? 1.0 : 0.0);
    }
  }
  // pairwise marginals
  for (int t = 1; t < t_len; ++t) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double m = std::exp(alpha[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i)] +
                                  p.trans(i, j) + emissions(t, j) +
                                  beta[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] - log_z);
        const bool on_gold = gold[static_cast<std::size_t>(t - 1)] == i && gold[static_cast<std::size_t>(t)] == j;
        g.d_trans(i, j) += m - (on_gold ? 1.0 : 0.0);
      }
    }
  }
  for (int j = 0; j < k; ++j) {
    const double m_first = std::exp(alpha[0][static_cast<std::size_t>(j)] + beta[0][static_cast<std::size_t>(j)] - log_z);
    const double m_last = std::exp(alpha.back()[static_cast<std::size_t>(j)] +
                                   beta.back()[static_cast<std::size_t>(j)] - log_z);
    g.d_start[static_cast<std::size_t>(j)] = m_first - (gold.front() == j ? 1.0 : 0.0);
    g.d_end[static_cast<std::size_t>(j)] = m_last - (gold.back() == j ? 1.0 : 0.0);
  }
  return g;
}

std::pair<std::vector<int>, double> viterbi(const DMatrix& emissions, const CrfParams& p) {
  check_inputs(emissions, p);
  const int t_len = emissions.rows(), k = p.n_tags();
  std::vector<std::vector<double>> delta(
      static_cast<std::size_t>(t_len), std::vector<double>(static_cast<std::size_t>(k)));
  std::vector<std::vector<int>> back(
      static_cast<std::size_t>(t_len), std::vector<int>(static_cast<std::size_t>(k), 0));

  for (int j = 0; j < k; ++j) delta[0][static_cast<std::size_t>(j)] = p.start[static_cast<std::size_t>(j)] + emissions(0, j);
  for (int t = 1; t < t_len; ++t) {
    for (int j = 0; j < k; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int i = 0; i < k; ++i) {
        const double cand = delta[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i)] + p.trans(i, j);
        if (cand > best) {  // ties keep the lowest tag index
          best = cand;
          arg = i;
        }
      }
      delta[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = best + emissions(t, j);
      back[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = arg;
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int j = 0; j < k; ++j) {
    const double cand = delta.back()[static_cast<std::size_t>(j)] + p.end[static_cast<std::size_t>(j)];
    if (cand > best) {
      best = cand;
      arg = j;
    }
  }
  std::vector<int> tags(static_cast<std::size_t>(t_len));
  tags.back() = arg;
  for (int t = t_len - 1; t > 0; --t) {
    tags[static_cast<std::size_t>(t - 1)] = back[static_cast<std::size_t>(t)][static_cast<std::size_t>(tags[static_cast<std::size_t>(t)])];
  }
  return {tags, best};
}

}  // namespace topics
