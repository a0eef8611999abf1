#include "topics/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace topics {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = M v (+ b), f32 parameters against f64 activations
template <typename BiasT>
void affine(const Matrix& m, const double* v, const BiasT* b, double* y) {
  for (int r = 0; r < m.rows(); ++r) {
    double acc = b ? static_cast<double>(b[r]) : 0.0;
    const float* row = m.row(r);
    for (int c = 0; c < m.cols(); ++c) acc += static_cast<double>(row[c]) * v[c];
    y[r] = acc;
  }
}

// y += M^T v
void add_transpose_matvec(const Matrix& m, const double* v, double* y) {
  for (int r = 0; r < m.rows(); ++r) {
    const float* row = m.row(r);
    const double vr = v[r];
    for (int c = 0; c < m.cols(); ++c) y[c] += static_cast<double>(row[c]) * vr;
  }
}

// G += a b^T
void add_outer(DMatrix& g, const double* a, const double* b) {
  for (int r = 0; r < g.rows(); ++r) {
    double* row = g.row(r);
    const double ar = a[r];
    for (int c = 0; c < g.cols(); ++c) row[c] += ar * b[c];
  }
}

GruDirectionGrads zero_direction_grads(int embed_dim, int hidden_dim) {
  GruDirectionGrads d;
  d.w_z = DMatrix(hidden_dim, embed_dim);
  d.w_r = DMatrix(hidden_dim, embed_dim);
  d.w_h = DMatrix(hidden_dim, embed_dim);
  d.u_z = DMatrix(hidden_dim, hidden_dim);
  d.u_r = DMatrix(hidden_dim, hidden_dim);
  d.u_h = DMatrix(hidden_dim, hidden_dim);
  d.b_z.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  d.b_r.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  d.b_h.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  return d;
}

// One GRU direction. `order` gives the time indices in recurrence order;
// cache rows stay aligned with input rows.
void run_direction(const DMatrix& input, const GruDirection& d, int hidden_dim,
                   const std::vector<int>& order, GruDirectionCache& cache) {
  const int t_len = input.rows();
  cache.update = DMatrix(t_len, hidden_dim);
  cache.reset = DMatrix(t_len, hidden_dim);
  cache.candidate = DMatrix(t_len, hidden_dim);
  cache.hidden = DMatrix(t_len, hidden_dim);

  const std::size_t h_sz = static_cast<std::size_t>(hidden_dim);
  std::vector<double> h_prev(h_sz, 0.0), gate(h_sz), tmp(h_sz), rh(h_sz);

  for (int s = 0; s < t_len; ++s) {
    const int t = order[static_cast<std::size_t>(s)];
    const double* x = input.row(t);

    affine(d.w_z, x, d.b_z.data(), gate.data());
    affine(d.u_z, h_prev.data(), static_cast<const float*>(nullptr), tmp.data());
    for (int j = 0; j < hidden_dim; ++j) cache.update(t, j) = sigmoid(gate[j] + tmp[j]);

    affine(d.w_r, x, d.b_r.data(), gate.data());
    affine(d.u_r, h_prev.data(), static_cast<const float*>(nullptr), tmp.data());
    for (int j = 0; j < hidden_dim; ++j) cache.reset(t, j) = sigmoid(gate[j] + tmp[j]);

    for (int j = 0; j < hidden_dim; ++j) rh[j] = cache.reset(t, j) * h_prev[j];
    affine(d.w_h, x, d.b_h.data(), gate.data());
    affine(d.u_h, rh.data(), static_cast<const float*>(nullptr), tmp.data());
    for (int j = 0; j < hidden_dim; ++j) cache.candidate(t, j) = std::tanh(gate[j] + tmp[j]);

    for (int j = 0; j < hidden_dim; ++j) {
      const double z = cache.update(t, j);
      cache.hidden(t, j) = (1.0 - z) * h_prev[j] + z * cache.candidate(t, j);
      h_prev[j] = cache.hidden(t, j);
    }
  }
}

// BPTT for one direction; accumulates parameter grads and the input grad.
void backward_direction(const DMatrix& input, const GruDirection& d, int hidden_dim,
                        const std::vector<int>& order, const GruDirectionCache& cache,
                        const DMatrix& d_hidden, GruDirectionGrads& grads,
                        DMatrix& d_input) {
  const int t_len = input.rows();
  const std::size_t h_sz = static_cast<std::size_t>(hidden_dim);
  std::vector<double> dh_next(h_sz, 0.0), dh(h_sz), dz_pre(h_sz), dr_pre(h_sz),
      dhb_pre(h_sz), rh(h_sz), uhback(h_sz), h_prev(h_sz);

  for (int s = t_len - 1; s >= 0; --s) {
    const int t = order[static_cast<std::size_t>(s)];
    if (s > 0) {
      const int tp = order[static_cast<std::size_t>(s - 1)];
      for (int j = 0; j < hidden_dim; ++j) h_prev[static_cast<std::size_t>(j)] = cache.hidden(tp, j);
    } else {
      std::fill(h_prev.begin(), h_prev.end(), 0.0);
    }
    const double* x = input.row(t);

    for (int j = 0; j < hidden_dim; ++j) {
      dh[static_cast<std::size_t>(j)] = d_hidden(t, j) + dh_next[static_cast<std::size_t>(j)];
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);

    for (int j = 0; j < hidden_dim; ++j) {
      const double z = cache.update(t, j);
      const double hb = cache.candidate(t, j);
      const double dz = dh[static_cast<std::size_t>(j)] * (hb - h_prev[static_cast<std::size_t>(j)]);
      const double dhb = dh[static_cast<std::size_t>(j)] * z;
      dh_next[static_cast<std::size_t>(j)] += dh[static_cast<std::size_t>(j)] * (1.0 - z);
      dz_pre[static_cast<std::size_t>(j)] = dz * z * (1.0 - z);
      dhb_pre[static_cast<std::size_t>(j)] = dhb * (1.0 - hb * hb);
    }

    // candidate path
    for (int j = 0; j < hidden_dim; ++j) {
      rh[static_cast<std::size_t>(j)] = cache.reset(t, j) * h_prev[static_cast<std::size_t>(j)];
    }
    add_outer(grads.w_h, dhb_pre.data(), x);
    add_outer(grads.u_h, dhb_pre.data(), rh.data());
    for (int j = 0; j < hidden_dim; ++j) grads.b_h[static_cast<std::size_t>(j)] += dhb_pre[static_cast<std::size_t>(j)];

    std::fill(uhback.begin(), uhback.end(), 0.0);
    add_transpose_matvec(d.u_h, dhb_pre.data(), uhback.data());
    for (int j = 0; j < hidden_dim; ++j) {
      const double r = cache.reset(t, j);
      const double dr = uhback[static_cast<std::size_t>(j)] * h_prev[static_cast<std::size_t>(j)];
      dr_pre[static_cast<std::size_t>(j)] = dr * r * (1.0 - r);
      dh_next[static_cast<std::size_t>(j)] += uhback[static_cast<std::size_t>(j)] * r;
    }

    // gate paths
    add_outer(grads.w_z, dz_pre.data(), x);
    add_outer(grads.u_z, dz_pre.data(), h_prev.data());
    add_outer(grads.w_r, dr_pre.data(), x);
    add_outer(grads.u_r, dr_pre.data(), h_prev.data());
    for (int j = 0; j < hidden_dim; ++j) {
      grads.b_z[static_cast<std::size_t>(j)] += dz_pre[static_cast<std::size_t>(j)];
      grads.b_r[static_cast<std::size_t>(j)] += dr_pre[static_cast<std::size_t>(j)];
    }
    add_transpose_matvec(d.u_z, dz_pre.data(), dh_next.data());
    add_transpose_matvec(d.u_r, dr_pre.data(), dh_next.data());

    double* dx = d_input.row(t);
    add_transpose_matvec(d.w_z, dz_pre.data(), dx);
    add_transpose_matvec(d.w_r, dr_pre.data(), dx);
    add_transpose_matvec(d.w_h, dhb_pre.data(), dx);
  }
}

void add_direction(GruDirectionGrads& a, const GruDirectionGrads& b) {
  a.w_z.add_scaled(b.w_z, 1.0);
  a.w_r.add_scaled(b.w_r, 1.0);
  a.w_h.add_scaled(b.w_h, 1.0);
  a.u_z.add_scaled(b.u_z, 1.0);
  a.u_r.add_scaled(b.u_r, 1.0);
  a.u_h.add_scaled(b.u_h, 1.0);
  for (std::size_t j = 0; j < a.b_z.size(); ++j) {
    a.b_z[j] += b.b_z[j];
    a.b_r[j] += b.b_r[j];
    a.b_h[j] += b.b_h[j];
  }
}

void sgd_direction(GruDirection& p, const GruDirectionGrads& g, float lr) {
  p.w_z.add_scaled(g.w_z, -lr);
  p.w_r.add_scaled(g.w_r, -lr);
  p.w_h.add_scaled(g.w_h, -lr);
  p.u_z.add_scaled(g.u_z, -lr);
  p.u_r.add_scaled(g.u_r, -lr);
  p.u_h.add_scaled(g.u_h, -lr);
  for (std::size_t j = 0; j < p.b_z.size(); ++j) {
    p.b_z[j] -= static_cast<float>(lr * g.b_z[j]);
    p.b_r[j] -= static_cast<float>(lr * g.b_r[j]);
    p.b_h[j] -= static_cast<float>(lr * g.b_h[j]);
  }
}

std::vector<int> time_order(int t_len, bool reversed) {
  std::vector<int> order(static_cast<std::size_t>(t_len));
  for (int t = 0; t < t_len; ++t) {
    order[static_cast<std::size_t>(t)] = reversed ? t_len - 1 - t : t;
  }
  return order;
}

void read_exact(std::ifstream& in, char* buf, std::streamsize n, const std::string& path) {
  if (!in.read(buf, n)) throw std::invalid_argument("truncated embedding file: " + path);
}

}  // namespace

Matrix glorot_uniform(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const float r = std::sqrt(6.0f / static_cast<float>(rows + cols));
  Matrix m(rows, cols);
  for (float& v : m.data()) {
    // portable uniform in [0,1): top 24 bits of the generator output
    const float u = static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f);
    v = (2.0f * u - 1.0f) * r;
  }
  return m;
}

Encoder Encoder::lookup(int vocab_size, int embed_dim, std::uint64_t seed) {
  if (vocab_size < 1 || embed_dim < 1) {
    throw std::invalid_argument("lookup encoder: bad dimensions");
  }
  Encoder e;
  e.cfg_.mode = EncoderMode::kLookup;
  e.cfg_.vocab_size = vocab_size;
  e.cfg_.embed_dim = embed_dim;
  e.table_ = glorot_uniform(vocab_size, embed_dim, seed);
  return e;
}

Encoder Encoder::precomputed(const std::string& path) {
  Encoder e;
  e.table_ = read_embedding_file(path);
  e.cfg_.mode = EncoderMode::kPrecomputed;
  e.cfg_.file_path = path;
  e.cfg_.embed_dim = e.table_.cols();
  e.cfg_.vocab_size = e.table_.rows();
  return e;
}

Encoder Encoder::from_table(EncoderConfig cfg, Matrix table) {
  Encoder e;
  e.cfg_ = std::move(cfg);
  e.table_ = std::move(table);
  return e;
}

DMatrix Encoder::encode(std::span<const int> ids) const {
  DMatrix out(static_cast<int>(ids.size()), cfg_.embed_dim);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const int id = ids[t];
    if (id < 0 || id >= table_.rows()) {
      throw std::invalid_argument("encode: id out of range");
    }
    const float* src = table_.row(id);
    double* dst = out.row(static_cast<int>(t));
    for (int c = 0; c < cfg_.embed_dim; ++c) dst[c] = src[c];
  }
  return out;
}

void write_embedding_file(const std::string& path, const Matrix& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding file: " + path);
  const std::uint32_t header[4] = {kEmbeddingMagic, kEmbeddingVersion,
                                   static_cast<std::uint32_t>(rows.rows()),
                                   static_cast<std::uint32_t>(rows.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(rows.data().data()),
            static_cast<std::streamsize>(rows.data().size() * sizeof(float)));
}

Matrix read_embedding_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open embedding file: " + path);
  std::uint32_t header[4];
  read_exact(in, reinterpret_cast<char*>(header), sizeof(header), path);
  if (header[0] != kEmbeddingMagic || header[1] != kEmbeddingVersion) {
    throw std::invalid_argument("bad embedding file header: " + path);
  }
  Matrix rows(static_cast<int>(header[2]), static_cast<int>(header[3]));
  read_exact(in, reinterpret_cast<char*>(rows.data().data()),
             static_cast<std::streamsize>(rows.data().size() * sizeof(float)), path);
  return rows;
}

GruParams GruParams::init(int embed_dim, int hidden_dim, int n_tags, std::uint64_t seed) {
  GruParams p;
  p.embed_dim = embed_dim;
  p.hidden_dim = hidden_dim;
  p.n_tags = n_tags;
  std::uint64_t s = seed;
  auto next = [&s] { return ++s; };
  for (GruDirection* d : {&p.fwd, &p.bwd}) {
    d->w_z = glorot_uniform(hidden_dim, embed_dim, next());
    d->w_r = glorot_uniform(hidden_dim, embed_dim, next());
    d->w_h = glorot_uniform(hidden_dim, embed_dim, next());
    d->u_z = glorot_uniform(hidden_dim, hidden_dim, next());
    d->u_r = glorot_uniform(hidden_dim, hidden_dim, next());
    d->u_h = glorot_uniform(hidden_dim, hidden_dim, next());
    d->b_z.assign(static_cast<std::size_t>(hidden_dim), 0.0f);
    d->b_r.assign(static_cast<std::size_t>(hidden_dim), 0.0f);
    d->b_h.assign(static_cast<std::size_t>(hidden_dim), 0.0f);
  }
  p.proj_w = glorot_uniform(n_tags, 2 * hidden_dim, next());
  p.proj_b.assign(static_cast<std::size_t>(n_tags), 0.0f);
  return p;
}

DMatrix bigru_forward(const DMatrix& input, const GruParams& p, GruCache* cache) {
  if (input.cols() != p.embed_dim) {
    throw std::invalid_argument("bigru_forward: input width != embed_dim");
  }
  const int t_len = input.rows();
  GruCache local;
  GruCache& c = cache ? *cache : local;
  c.input = input;
  run_direction(input, p.fwd, p.hidden_dim, time_order(t_len, false), c.fwd);
  run_direction(input, p.bwd, p.hidden_dim, time_order(t_len, true), c.bwd);

  c.concat = DMatrix(t_len, 2 * p.hidden_dim);
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < p.hidden_dim; ++j) {
      c.concat(t, j) = c.fwd.hidden(t, j);
      c.concat(t, p.hidden_dim + j) = c.bwd.hidden(t, j);
    }
  }
  return c.concat;
}

DMatrix emissions(const DMatrix& hidden, const GruParams& p) {
  if (hidden.cols() != 2 * p.hidden_dim) {
    throw std::invalid_argument("emissions: hidden width != 2*hidden_dim");
  }
  DMatrix scores(hidden.rows(), p.n_tags);
  for (int t = 0; t < hidden.rows(); ++t) {
    affine(p.proj_w, hidden.row(t), p.proj_b.data(), scores.row(t));
  }
  return scores;
}

GruGrads GruGrads::zeros(const GruParams& p) {
  GruGrads g;
  g.fwd = zero_direction_grads(p.embed_dim, p.hidden_dim);
  g.bwd = zero_direction_grads(p.embed_dim, p.hidden_dim);
  g.proj_w = DMatrix(p.n_tags, 2 * p.hidden_dim);
  g.proj_b.assign(static_cast<std::size_t>(p.n_tags), 0.0);
  g.input = DMatrix();
  return g;
}

void GruGrads::accumulate(const GruGrads& o) {
  add_direction(fwd, o.fwd);
  add_direction(bwd, o.bwd);
  proj_w.add_scaled(o.proj_w, 1.0);
  for (std::size_t j = 0; j < proj_b.size(); ++j) proj_b[j] += o.proj_b[j];
}

GruGrads backward(const DMatrix& d_emissions, const GruCache& cache, const GruParams& p) {
  if (cache.concat.empty()) {
    throw std::logic_error("backward: forward cache missing");
  }
  if (d_emissions.rows() != cache.concat.rows() || d_emissions.cols() != p.n_tags) {
    throw std::invalid_argument("backward: bad d_emissions shape");
  }
  const int t_len = cache.concat.rows();
  GruGrads g = GruGrads::zeros(p);
  g.input = DMatrix(t_len, p.embed_dim);

  // projection: scores = H proj_w^T + b
  DMatrix d_concat(t_len, 2 * p.hidden_dim);
  for (int t = 0; t < t_len; ++t) {
    add_outer(g.proj_w, d_emissions.row(t), cache.concat.row(t));
    for (int k = 0; k < p.n_tags; ++k) {
      g.proj_b[static_cast<std::size_t>(k)] += d_emissions(t, k);
    }
    add_transpose_matvec(p.proj_w, d_emissions.row(t), d_concat.row(t));
  }

  DMatrix d_fwd(t_len, p.hidden_dim), d_bwd(t_len, p.hidden_dim);
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < p.hidden_dim; ++j) {
      d_fwd(t, j) = d_concat(t, j);
      d_bwd(t, j) = d_concat(t, p.hidden_dim + j);
    }
  }
  backward_direction(cache.input, p.fwd, p.hidden_dim, time_order(t_len, false),
                     cache.fwd, d_fwd, g.fwd, g.input);
  backward_direction(cache.input, p.bwd, p.hidden_dim, time_order(t_len, true),
                     cache.bwd, d_bwd, g.bwd, g.input);
  return g;
}

void apply_sgd(GruParams& p, const GruGrads& g, float lr) {
  sgd_direction(p.fwd, g.fwd, lr);
  sgd_direction(p.bwd, g.bwd, lr);
  p.proj_w.add_scaled(g.proj_w, -lr);
  for (std::size_t j = 0; j < p.proj_b.size(); ++j) {
    p.proj_b[j] -= static_cast<float>(lr * g.proj_b[j]);
  }
}

}  // namespace topics
