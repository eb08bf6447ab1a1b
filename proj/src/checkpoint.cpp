#include "tkgc/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace tkgc {
namespace {

constexpr std::array<char, 8> kMagic = {'T', 'K', 'G', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kDtypeFloat64 = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write checkpoint " + path.string());
  }
  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void finish() {
    out_.flush();
    if (!out_) throw Error("checkpoint write failed");
  }

 private:
  void le(std::uint64_t v, int n) {
    unsigned char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, static_cast<std::size_t>(n));
  }
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error("cannot read checkpoint " + path.string());
  }
  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw Error("truncated checkpoint " + path_.string());
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str(std::size_t limit) {
    const std::uint64_t n = u64();
    if (n > limit) throw Error("corrupt checkpoint " + path_.string());
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::uint64_t le(int n) {
    unsigned char buf[8];
    bytes(buf, static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::ifstream in_;
  std::filesystem::path path_;
};

void write_group(Writer& w, const ModelParams& params) {
  const auto tensors = params.tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::string_view name = ModelParams::kTensorNames[i];
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u64(tensors[i]->rows());
    w.u64(tensors[i]->cols());
    for (double v : tensors[i]->flat()) w.f64(v);
  }
}

void read_group(Reader& r, ModelParams& params) {
  auto tensors = params.tensors();
  if (r.u32() != tensors.size()) throw Error("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::uint32_t len = r.u32();
    if (len > 64) throw Error("checkpoint tensor name too long");
    std::string name(len, '\0');
    r.bytes(name.data(), len);
    if (name != ModelParams::kTensorNames[i]) {
      throw Error("checkpoint tensor '" + name + "' where '" +
                  std::string(ModelParams::kTensorNames[i]) + "' was expected");
    }
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != tensors[i]->rows() || cols != tensors[i]->cols()) {
      throw Error("checkpoint tensor '" + name + "' has shape " + std::to_string(rows) + "x" +
                  std::to_string(cols) + ", expected " + std::to_string(tensors[i]->rows()) + "x" +
                  std::to_string(tensors[i]->cols()));
    }
    for (double& v : tensors[i]->flat()) v = r.f64();
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  // Write to a sibling file and rename, so a crash never leaves a torn checkpoint.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    Writer w(tmp);
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kCheckpointVersion);
    w.u32(kDtypeFloat64);
    w.str(ck.config.to_text());
    w.u64(ck.vocab.num_entities);
    w.u64(ck.vocab.num_base_relations);
    w.u64(ck.vocab.num_timestamps);
    w.u64(ck.state.epochs_done);
    w.u64(ck.state.best_epoch);
    w.f64(ck.state.best_valid_mrr);
    w.u64(ck.state.adam.step);
    write_group(w, ck.state.params);
    write_group(w, ck.state.best_params);
    write_group(w, ck.state.adam.m);
    write_group(w, ck.state.adam.v);
    w.finish();
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw Error(path.string() + " is not a checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  if (r.u32() != kDtypeFloat64) throw Error("unsupported checkpoint dtype");
  Checkpoint ck;
  ck.config = RunConfig::from_text(r.str(1 << 20));
  ck.vocab.num_entities = r.u64();
  ck.vocab.num_base_relations = r.u64();
  ck.vocab.num_timestamps = r.u64();
  ck.state.epochs_done = r.u64();
  ck.state.best_epoch = r.u64();
  ck.state.best_valid_mrr = r.f64();
  ck.state.adam.step = r.u64();
  ck.state.params = ModelParams::zeros(ck.config, ck.vocab);
  ck.state.best_params = ModelParams::zeros_like(ck.state.params);
  ck.state.adam.m = ModelParams::zeros_like(ck.state.params);
  ck.state.adam.v = ModelParams::zeros_like(ck.state.params);
  read_group(r, ck.state.params);
  read_group(r, ck.state.best_params);
  read_group(r, ck.state.adam.m);
  read_group(r, ck.state.adam.v);
  return ck;
}

}  // namespace tkgc
