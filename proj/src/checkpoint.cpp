#include "linksched/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "linksched/error.hpp"

namespace linksched {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'L', 'S', 'C', 'K', 'P', 'T', '\0', '\0'};

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    out_.append(p, sizeof(T));
  }
  void put_bytes(const char* p, std::size_t n) { out_.append(p, n); }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void put_matrix(const Matrix& m) {
    put(static_cast<std::uint32_t>(m.rows()));
    put(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.values()) put(v);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string get_string() { return get_bytes(get<std::uint32_t>()); }
  Matrix get_matrix() {
    const auto rows = get<std::uint32_t>();
    const auto cols = get<std::uint32_t>();
    need(std::size_t{rows} * cols * sizeof(double));
    Matrix m(rows, cols);
    for (double& v : m.values()) v = get<double>();
    return m;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw InputError("checkpoint is truncated");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InputError(std::string("checkpoint tensor ") + name + " has unexpected shape");
  }
}

}  // namespace

std::string serialize_checkpoint(const ModelParams& model) {
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::int32_t>(model.arch.embed_dim));
  w.put(static_cast<std::int32_t>(model.arch.iterations));
  w.put(static_cast<std::int32_t>(model.arch.quant_bits));
  w.put(static_cast<std::int32_t>(model.arch.hidden));
  w.put(static_cast<std::int32_t>(model.arch.topology.kind));
  w.put(static_cast<std::int32_t>(model.arch.topology.k));
  w.put(model.clf.bn_eps);
  w.put(model.clf.bn_momentum);
  w.put_string(model.config_hash);
  const auto params = model.parameters();
  w.put(static_cast<std::uint32_t>(params.size() + 2));
  for (const Matrix* m : params) w.put_matrix(*m);
  w.put_matrix(model.clf.running_mean);
  w.put_matrix(model.clf.running_var);
  return w.take();
}

ModelParams deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.get_bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) throw InputError("not a model checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CompatibilityError("unsupported checkpoint version " + std::to_string(version));
  }
  Architecture arch;
  arch.embed_dim = r.get<std::int32_t>();
  arch.iterations = r.get<std::int32_t>();
  arch.quant_bits = r.get<std::int32_t>();
  arch.hidden = r.get<std::int32_t>();
  const auto kind = r.get<std::int32_t>();
  if (kind != 0 && kind != 1) throw InputError("checkpoint has an unknown topology");
  arch.topology.kind = static_cast<Topology::Kind>(kind);
  arch.topology.k = r.get<std::int32_t>();
  try {
    arch.validate();
  } catch (const ConfigError& e) {
    throw InputError(std::string("checkpoint architecture invalid: ") + e.what());
  }

  ModelParams model = init_model(arch, 0);
  model.clf.bn_eps = r.get<double>();
  model.clf.bn_momentum = r.get<double>();
  model.config_hash = r.get_string();
  auto params = model.parameters();
  if (r.get<std::uint32_t>() != params.size() + 2) throw InputError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix m = r.get_matrix();
    expect_shape(m, params[i]->rows(), params[i]->cols(), ModelParams::parameter_name(i));
    *params[i] = std::move(m);
  }
  Matrix mean = r.get_matrix();
  Matrix var = r.get_matrix();
  expect_shape(mean, 1, model.clf.hidden_w.rows(), "running_mean");
  expect_shape(var, 1, model.clf.hidden_w.rows(), "running_var");
  model.clf.running_mean = std::move(mean);
  model.clf.running_var = std::move(var);
  if (!r.done()) throw InputError("checkpoint has trailing bytes");
  model.zero_grad();
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& model) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace linksched
