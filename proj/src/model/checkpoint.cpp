#include "sttraj/model/checkpoint.hpp"

#include "sttraj/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string_view>

namespace sttraj::model {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'T', 'C'};
constexpr std::string_view kVelocityPrefix = "velocity/";

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  template <typename UInt>
  void uint(UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void string(std::string_view s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::string_view bytes(std::size_t n) {
    if (data_.size() - pos_ < n) throw IntegrityError("checkpoint is truncated");
    const auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  template <typename UInt>
  UInt uint() {
    const auto b = bytes(sizeof(UInt));
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string string() { return std::string(bytes(uint<std::uint32_t>())); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const std::string& name, const ad::Shape& shape, const ad::Vector& values) {
  w.string(name);
  w.uint(static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) w.uint(static_cast<std::uint32_t>(d));
  for (double v : values) w.f64(v);
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model, const TrainingState& state) {
  Writer w;
  w.bytes(std::string_view(kMagic, 4));
  w.uint(kCheckpointVersion);
  std::string config;
  for (const auto& [k, v] : model.config().to_key_values()) config += k + "=" + v + "\n";
  w.string(config);
  w.uint(state.epoch);
  w.uint(state.seed);
  w.f64(state.best_loss);

  const auto& tensors = model.tensors();
  const auto& params = model.parameters();
  std::size_t velocity_count = 0;
  for (std::size_t i = 0; i < params.size() && i < state.optimizer.velocity.size(); ++i) {
    if (state.optimizer.velocity[i].size() == params[i].tensor.size()) ++velocity_count;
  }
  w.uint(static_cast<std::uint32_t>(tensors.size() + velocity_count));
  for (const auto& t : tensors) write_tensor(w, t.name, t.tensor.shape(), t.tensor.value());
  for (std::size_t i = 0; i < params.size() && i < state.optimizer.velocity.size(); ++i) {
    const auto& v = state.optimizer.velocity[i];
    if (v.size() != params[i].tensor.size()) continue;
    write_tensor(w, std::string(kVelocityPrefix) + params[i].name, params[i].tensor.shape(), v);
  }
  const std::uint64_t checksum = fnv1a(w.buffer());
  w.uint(checksum);
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw std::runtime_error("failed to write checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainingState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, model, state);
}

LoadedCheckpoint read_checkpoint(std::istream& in) {
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) {
    throw IntegrityError("not a checkpoint (bad magic bytes)");
  }
  Reader r(data);
  r.bytes(4);
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  if (data.size() < 16) throw IntegrityError("checkpoint is truncated");
  const std::string_view body(data.data(), data.size() - 8);
  Reader tail(std::string_view(data).substr(data.size() - 8));
  if (fnv1a(body) != tail.uint<std::uint64_t>()) {
    throw IntegrityError("checkpoint checksum mismatch (truncated or corrupt file)");
  }

  std::map<std::string, std::string> kv;
  {
    std::istringstream ss(r.string());
    std::string line;
    while (std::getline(ss, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw IntegrityError("malformed config line in checkpoint");
      kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  TrainingState state;
  state.epoch = r.uint<std::uint64_t>();
  state.seed = r.uint<std::uint64_t>();
  state.best_loss = r.f64();

  Model model(ModelConfig::from_key_values(kv));
  std::map<std::string, ad::Tensor> by_name;
  for (const auto& t : model.tensors()) by_name.emplace(t.name, t.tensor);
  std::map<std::string, std::size_t> param_index;
  for (std::size_t i = 0; i < model.parameters().size(); ++i) param_index.emplace(model.parameters()[i].name, i);
  state.optimizer.velocity.assign(model.parameters().size(), ad::Vector());

  std::set<std::string> seen;
  const auto count = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.string();
    if (!seen.insert(name).second) throw IntegrityError("duplicate tensor '" + name + "' in checkpoint");
    const auto rank = r.uint<std::uint32_t>();
    ad::Shape shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(r.uint<std::uint32_t>());
    const auto n = ad::element_count(shape);
    if (static_cast<std::size_t>(n) * 8 > r.remaining()) throw IntegrityError("checkpoint is truncated");
    ad::Vector values(n);
    for (ad::Index k = 0; k < n; ++k) values[k] = r.f64();

    const bool velocity = name.rfind(kVelocityPrefix, 0) == 0;
    const std::string target = velocity ? name.substr(kVelocityPrefix.size()) : name;
    const auto it = by_name.find(target);
    if (it == by_name.end()) throw IntegrityError("checkpoint tensor '" + name + "' is not part of the model");
    if (it->second.shape() != shape) {
      throw IntegrityError("checkpoint tensor '" + name + "' has shape " + ad::to_string(shape) +
                           ", model expects " + ad::to_string(it->second.shape()));
    }
    if (velocity) {
      const auto p = param_index.find(target);
      if (p == param_index.end()) throw IntegrityError("velocity for non-trainable tensor '" + target + "'");
      state.optimizer.velocity[p->second] = std::move(values);
    } else {
      ad::Tensor t = it->second;
      t.mutable_value() = std::move(values);
    }
  }
  for (const auto& t : model.tensors()) {
    if (!seen.count(t.name)) throw IntegrityError("checkpoint is missing tensor '" + t.name + "'");
  }
  if (r.remaining() != 8) throw IntegrityError("unexpected trailing bytes in checkpoint");
  return {std::move(model), std::move(state)};
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace sttraj::model
