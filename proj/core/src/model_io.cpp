#include <cstring>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "topics/tagger.hpp"

namespace topics {
namespace {

constexpr char kMagic[4] = {'T', 'P', 'S', 'Q'};
constexpr std::uint32_t kModelVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw incompatible_model_error("model file truncated");
  }
  return v;
}

void write_tensor(std::ostream& out, const std::string& name, const float* data,
                  std::uint32_t rows, std::uint32_t cols) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(out, rows);
  write_u32(out, cols);
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(sizeof(float) * rows * cols));
}

void write_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
  write_tensor(out, name, m.data().data(), static_cast<std::uint32_t>(m.rows()),
               static_cast<std::uint32_t>(m.cols()));
}

void write_tensor(std::ostream& out, const std::string& name, const std::vector<float>& v) {
  write_tensor(out, name, v.data(), 1, static_cast<std::uint32_t>(v.size()));
}

struct TensorMap {
  std::map<std::string, Matrix> tensors;

  Matrix matrix(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw incompatible_model_error("model file missing tensor: " + name);
    }
    return it->second;
  }
  std::vector<float> vector(const std::string& name) const {
    return matrix(name).data();
  }
};

void write_direction(std::ostream& out, const std::string& prefix, const GruDirection& d) {
  write_tensor(out, prefix + ".w_z", d.w_z);
  write_tensor(out, prefix + ".w_r", d.w_r);
  write_tensor(out, prefix + ".w_h", d.w_h);
  write_tensor(out, prefix + ".u_z", d.u_z);
  write_tensor(out, prefix + ".u_r", d.u_r);
  write_tensor(out, prefix + ".u_h", d.u_h);
  write_tensor(out, prefix + ".b_z", d.b_z);
  write_tensor(out, prefix + ".b_r", d.b_r);
  write_tensor(out, prefix + ".b_h", d.b_h);
}

GruDirection read_direction(const TensorMap& t, const std::string& prefix) {
  GruDirection d;
  d.w_z = t.matrix(prefix + ".w_z");
  d.w_r = t.matrix(prefix + ".w_r");
  d.w_h = t.matrix(prefix + ".w_h");
  d.u_z = t.matrix(prefix + ".u_z");
  d.u_r = t.matrix(prefix + ".u_r");
  d.u_h = t.matrix(prefix + ".u_h");
  d.b_z = t.vector(prefix + ".b_z");
  d.b_r = t.vector(prefix + ".b_r");
  d.b_h = t.vector(prefix + ".b_h");
  return d;
}

}  // namespace

void save_model(const TaggerModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kModelVersion);

  const auto& cfg = model.encoder.config();
  nlohmann::json meta{
      {"mode", cfg.mode == EncoderMode::kLookup ? "lookup" : "precomputed"},
      {"embed_dim", cfg.embed_dim},
      {"vocab_size", cfg.vocab_size},
      {"file_path", cfg.file_path},
      {"hidden_dim", model.gru.hidden_dim},
      {"n_tags", model.gru.n_tags},
      {"labels", model.scheme.labels},
      {"outside_label", model.scheme.outside_label},
      {"seq_len", model.seq_len},
      {"vocab_fingerprint", model.vocab_fingerprint},
  };
  const std::string meta_str = meta.dump();
  write_u32(out, static_cast<std::uint32_t>(meta_str.size()));
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

  write_tensor(out, "encoder.table", model.encoder.table());
  write_direction(out, "gru.fwd", model.gru.fwd);
  write_direction(out, "gru.bwd", model.gru.bwd);
  write_tensor(out, "gru.proj_w", model.gru.proj_w);
  write_tensor(out, "gru.proj_b", model.gru.proj_b);
  write_tensor(out, "crf.trans", model.crf.trans);
  write_tensor(out, "crf.start", model.crf.start);
  write_tensor(out, "crf.end", model.crf.end);
}

TaggerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw incompatible_model_error("bad model file magic: " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kModelVersion) {
    throw incompatible_model_error("unsupported model version " + std::to_string(version));
  }
  const std::uint32_t meta_len = read_u32(in);
  std::string meta_str(meta_len, '\0');
  if (!in.read(meta_str.data(), meta_len)) {
    throw incompatible_model_error("model file truncated in metadata");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_str);
  } catch (const nlohmann::json::exception&) {
    throw incompatible_model_error("model metadata is not valid JSON");
  }

  TensorMap tensors;
  while (in.peek() != std::char_traits<char>::eof()) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw incompatible_model_error("model file truncated in tensor name");
    }
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    if (!in.read(reinterpret_cast<char*>(m.data().data()),
                 static_cast<std::streamsize>(sizeof(float) * rows * cols))) {
      throw incompatible_model_error("model file truncated in tensor data");
    }
    tensors.tensors.emplace(std::move(name), std::move(m));
  }

  TaggerModel model;
  EncoderConfig cfg;
  cfg.mode = meta.at("mode") == "lookup" ? EncoderMode::kLookup : EncoderMode::kPrecomputed;
  cfg.embed_dim = meta.at("embed_dim");
  cfg.vocab_size = meta.at("vocab_size");
  cfg.file_path = meta.at("file_path");
  model.encoder = Encoder::from_table(cfg, tensors.matrix("encoder.table"));

  model.gru.embed_dim = cfg.embed_dim;
  model.gru.hidden_dim = meta.at("hidden_dim");
  model.gru.n_tags = meta.at("n_tags");
  model.gru.fwd = read_direction(tensors, "gru.fwd");
  model.gru.bwd = read_direction(tensors, "gru.bwd");
  model.gru.proj_w = tensors.matrix("gru.proj_w");
  model.gru.proj_b = tensors.vector("gru.proj_b");
  model.crf.trans = tensors.matrix("crf.trans");
  model.crf.start = tensors.vector("crf.start");
  model.crf.end = tensors.vector("crf.end");
  model.scheme.labels = meta.at("labels").get<std::vector<std::string>>();
  model.scheme.outside_label = meta.at("outside_label");
  model.seq_len = meta.at("seq_len");
  model.vocab_fingerprint = meta.at("vocab_fingerprint");
  return model;
}

TaggerModel load_model(const std::string& path, const Vocabulary& vocab) {
  TaggerModel model = load_model(path);
  if (model.vocab_fingerprint != vocab.fingerprint()) {
    throw incompatible_model_error("vocabulary fingerprint mismatch for model " + path);
  }
  return model;
}

}  // namespace topics
