#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topics/matrix.hpp"

namespace topics {

enum class EncoderMode { kLookup, kPrecomputed };

struct EncoderConfig {
  EncoderMode mode = EncoderMode::kLookup;
  int embed_dim = 128;
  int vocab_size = 0;        // lookup mode
  std::string file_path;     // precomputed mode
};

// Binary embedding file: magic, version, count, dim as little-endian u32,
// then count x dim little-endian f32 rows. Row index = position key.
inline constexpr std::uint32_t kEmbeddingMagic = 0x31424d45;  // "EMB1"
inline constexpr std::uint32_t kEmbeddingVersion = 1;

void write_embedding_file(const std::string& path, const Matrix& rows);
Matrix read_embedding_file(const std::string& path);

// Token encoder: either a trainable lookup table or frozen rows loaded from
// an embedding file (the stand-in for contextual encoder output).
class Encoder {
 public:
  Encoder() = default;

  static Encoder lookup(int vocab_size, int embed_dim, std::uint64_t seed);
  static Encoder precomputed(const std::string& path);
  static Encoder from_table(EncoderConfig cfg, Matrix table);

  DMatrix encode(std::span<const int> ids) const;

  bool trainable() const { return cfg_.mode == EncoderMode::kLookup; }
  int embed_dim() const { return cfg_.embed_dim; }
  const EncoderConfig& config() const { return cfg_; }
  Matrix& table() { return table_; }
  const Matrix& table() const { return table_; }

 private:
  EncoderConfig cfg_;
  Matrix table_;
};

struct GruDirection {
  Matrix w_z, w_r, w_h;  // hidden x embed
  Matrix u_z, u_r, u_h;  // hidden x hidden
  std::vector<float> b_z, b_r, b_h;
};

struct GruParams {
  int embed_dim = 0;
  int hidden_dim = 0;
  int n_tags = 0;
  GruDirection fwd, bwd;
  Matrix proj_w;              // n_tags x 2*hidden
  std::vector<float> proj_b;  // n_tags

  static GruParams init(int embed_dim, int hidden_dim, int n_tags, std::uint64_t seed);
};

struct GruDirectionCache {
  DMatrix update, reset, candidate, hidden;  // each T x hidden, row t aligned to input row t
};

struct GruCache {
  DMatrix input;   // T x embed
  GruDirectionCache fwd, bwd;
  DMatrix concat;  // T x 2*hidden
};

// Single Bi-GRU layer, h_0 = 0 in both directions; output row t is
// [forward h_t ; backward h_t].
DMatrix bigru_forward(const DMatrix& input, const GruParams& p, GruCache* cache = nullptr);

// Affine projection of the concatenated hidden states to per-tag scores.
DMatrix emissions(const DMatrix& hidden, const GruParams& p);

struct GruDirectionGrads {
  DMatrix w_z, w_r, w_h, u_z, u_r, u_h;
  std::vector<double> b_z, b_r, b_h;
};

struct GruGrads {
  GruDirectionGrads fwd, bwd;
  DMatrix proj_w;
  std::vector<double> proj_b;
  DMatrix input;  // gradient w.r.t. the encoder output

  static GruGrads zeros(const GruParams& p);
  void accumulate(const GruGrads& o);
};

// Exact gradients of a scalar loss through emissions and both GRU
// directions, given the loss gradient at the emission matrix.
GruGrads backward(const DMatrix& d_emissions, const GruCache& cache, const GruParams& p);

void apply_sgd(GruParams& p, const GruGrads& g, float lr);

// Seedable uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(int rows, int cols, std::uint64_t seed);

}  // namespace topics
