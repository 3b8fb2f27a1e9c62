#include "tsc/neural/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "tsc/common/errors.hpp"

namespace tsc::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<std::size_t>(in.gcount()) == sizeof(T);
}

}  // namespace

void write_checkpoint(std::ostream& out, const QNetworkParams& params) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& [name, var] : params.named()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(var->value.rank()));
    for (std::size_t d : var->value.shape) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(var->value.values.data()),
              static_cast<std::streamsize>(var->value.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const QNetworkParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  write_checkpoint(out, params);
}

QNetworkParams read_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw LoadError("not a checkpoint file (bad magic)");
  std::uint32_t version = 0;
  if (!get(in, version) || version != kCheckpointVersion)
    throw LoadError("unsupported checkpoint version " + std::to_string(version));

  QNetworkParams params = QNetworkParams::init(0);
  std::map<std::string, Var> expected;
  for (auto& [name, var] : params.named()) expected.emplace(name, var);
  std::map<std::string, bool> seen;

  while (in.peek() != std::char_traits<char>::eof()) {
    std::uint32_t name_len = 0;
    if (!get(in, name_len) || name_len > 256) throw LoadError("truncated or corrupt tensor header");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (static_cast<std::uint32_t>(in.gcount()) != name_len) throw LoadError("truncated tensor name");
    auto it = expected.find(name);
    if (it == expected.end()) throw LoadError("unexpected tensor '" + name + "'");
    if (seen[name]) throw LoadError("duplicate tensor '" + name + "'");
    seen[name] = true;

    Tensor& target = it->second->value;
    std::uint32_t rank = 0;
    if (!get(in, rank) || rank != target.rank())
      throw LoadError("tensor '" + name + "' has rank " + std::to_string(rank) + ", expected " +
                      std::to_string(target.rank()));
    for (std::uint32_t r = 0; r < rank; ++r) {
      std::uint64_t d = 0;
      if (!get(in, d) || d != target.shape[r])
        throw LoadError("tensor '" + name + "' dimension " + std::to_string(r) + " is " + std::to_string(d) +
                        ", expected " + std::to_string(target.shape[r]));
    }
    in.read(reinterpret_cast<char*>(target.values.data()),
            static_cast<std::streamsize>(target.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != target.size() * sizeof(double))
      throw LoadError("tensor '" + name + "' values truncated");
  }
  for (auto& [name, var] : expected)
    if (!seen[name]) throw LoadError("checkpoint missing tensor '" + name + "'");
  return params;
}

QNetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace tsc::nn
