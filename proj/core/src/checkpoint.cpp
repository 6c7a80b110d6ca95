#include "ssan/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ssan/error.hpp"

namespace ssan {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'A', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void put_doubles(const std::vector<double>& values) {
    for (double v : values) put(std::bit_cast<std::uint64_t>(v));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (in_.gcount() != sizeof(T)) throw FormatError("checkpoint truncated");
    return to_little(v);
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (static_cast<std::uint32_t>(in_.gcount()) != n)
      throw FormatError("checkpoint truncated in string");
    return s;
  }
  std::vector<double> get_doubles(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = std::bit_cast<double>(get<std::uint64_t>());
    return out;
  }

 private:
  std::istream& in_;
};

}  // namespace

Checkpoint Checkpoint::capture(const ParameterStore& store,
                               const AdamState& state,
                               std::map<std::string, std::string> metadata) {
  Checkpoint ckpt;
  ckpt.metadata = std::move(metadata);
  for (const auto& p : store.all())
    ckpt.parameters.push_back(
        Entry{p.name, p.trainable, p.tensor.shape(),
              std::vector<double>(p.tensor.values().begin(),
                                  p.tensor.values().end())});
  ckpt.optimizer = state;
  return ckpt;
}

void Checkpoint::restore_into(ParameterStore& store) const {
  if (store.size() != parameters.size())
    throw FormatError("checkpoint has " + std::to_string(parameters.size()) +
                      " parameters, model expects " +
                      std::to_string(store.size()));
  for (const auto& entry : parameters) {
    auto& p = store.get(entry.name);
    if (p.tensor.shape() != entry.shape)
      throw FormatError("checkpoint parameter '" + entry.name + "' has shape " +
                        shape_string(entry.shape) + ", model expects " +
                        shape_string(p.tensor.shape()));
    std::copy(entry.values.begin(), entry.values.end(),
              p.tensor.mutable_values().begin());
    p.trainable = entry.trainable;
  }
}

void Checkpoint::write(std::ostream& out) const {
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.put(kVersion);
  w.put(static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    w.put_string(k);
    w.put_string(v);
  }
  w.put(static_cast<std::uint32_t>(parameters.size()));
  for (const auto& p : parameters) {
    w.put_string(p.name);
    w.put(static_cast<std::uint8_t>(p.trainable ? 1 : 0));
    w.put(static_cast<std::uint32_t>(p.shape.size()));
    for (auto d : p.shape) w.put(static_cast<std::uint64_t>(d));
    w.put_doubles(p.values);
  }
  w.put(static_cast<std::uint64_t>(optimizer.step));
  w.put(static_cast<std::uint32_t>(optimizer.moments.size()));
  for (const auto& m : optimizer.moments) {
    w.put_string(m.name);
    w.put(static_cast<std::uint64_t>(m.first.size()));
    w.put_doubles(m.first);
    w.put_doubles(m.second);
  }
  if (!out) throw FormatError("failed writing checkpoint");
}

Checkpoint Checkpoint::read(std::istream& in) {
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a checkpoint (bad magic)");
  Reader r(in);
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  const auto meta_count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    auto key = r.get_string();
    ckpt.metadata[key] = r.get_string();
  }
  const auto param_count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < param_count; ++i) {
    Entry e;
    e.name = r.get_string();
    e.trainable = r.get<std::uint8_t>() != 0;
    const auto rank = r.get<std::uint32_t>();
    for (std::uint32_t d = 0; d < rank; ++d)
      e.shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
    e.values = r.get_doubles(numel(e.shape));
    ckpt.parameters.push_back(std::move(e));
  }
  ckpt.optimizer.step = r.get<std::uint64_t>();
  const auto moment_count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < moment_count; ++i) {
    AdamMoments m;
    m.name = r.get_string();
    const auto n = static_cast<std::size_t>(r.get<std::uint64_t>());
    m.first = r.get_doubles(n);
    m.second = r.get_doubles(n);
    ckpt.optimizer.moments.push_back(std::move(m));
  }
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write(out);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
  return read(in);
}

}  // namespace ssan
