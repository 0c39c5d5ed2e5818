#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "stid/error.hpp"
#include "stid/model.hpp"

namespace stid {
namespace {

constexpr std::array<char, 8> kMagic = {'S', 'T', 'I', 'D', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kConfigFields = 10;
constexpr std::size_t kHeaderBytes = kMagic.size() + 4 + kConfigFields * 8;

void put_le(std::vector<char>& out, std::uint64_t v, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const char* p, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

std::uint64_t flags_of(const StidConfig& c) {
  return (c.use_spatial ? 1u : 0u) | (c.use_tid ? 2u : 0u) | (c.use_diw ? 4u : 0u);
}

}  // namespace

void save_params(const StidParams& params, const StidConfig& config,
                 const std::filesystem::path& path) {
  check_params(params, config);
  std::vector<char> buf(kMagic.begin(), kMagic.end());
  put_le(buf, kVersion, 4);
  for (std::uint64_t v : {std::uint64_t{config.num_vars}, std::uint64_t{config.history_len},
                          std::uint64_t{config.horizon}, std::uint64_t{config.hidden_dim},
                          std::uint64_t{config.num_layers}, std::uint64_t{config.slots_per_day},
                          flags_of(config), std::uint64_t{config.spatial_dim},
                          std::uint64_t{config.tid_dim}, std::uint64_t{config.diw_dim}}) {
    put_le(buf, v, 8);
  }
  for_each_tensor(params, [&buf](const std::string&, const Matrix& m) {
    for (double x : m.values()) put_le(buf, std::bit_cast<std::uint64_t>(x), 8);
  });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing model file '" + path.string() + "'");
}

LoadedModel load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "model file '" + path.string() + "': ";
  if (buf.size() < kHeaderBytes) {
    throw CorruptFileError(where + "truncated header (" + std::to_string(buf.size()) + " bytes)");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), buf.begin())) {
    throw CorruptFileError(where + "bad magic");
  }
  const auto version = static_cast<std::uint32_t>(get_le(buf.data() + 8, 4));
  if (version != kVersion) {
    throw CorruptFileError(where + "unsupported version " + std::to_string(version));
  }
  const char* p = buf.data() + 12;
  auto next = [&p] {
    const std::uint64_t v = get_le(p, 8);
    p += 8;
    return static_cast<std::size_t>(v);
  };
  LoadedModel m;
  m.config.num_vars = next();
  m.config.history_len = next();
  m.config.horizon = next();
  m.config.hidden_dim = next();
  m.config.num_layers = next();
  m.config.slots_per_day = next();
  const std::size_t flags = next();
  if (flags > 7) throw CorruptFileError(where + "invalid identity flags");
  m.config.use_spatial = flags & 1u;
  m.config.use_tid = flags & 2u;
  m.config.use_diw = flags & 4u;
  m.config.spatial_dim = next();
  m.config.tid_dim = next();
  m.config.diw_dim = next();
  try {
    m.config.validate();
  } catch (const ConfigError& e) {
    throw CorruptFileError(where + e.what());
  }
  // Guard against absurd headers before allocating.
  const std::size_t payload = buf.size() - kHeaderBytes;
  const double expected_values = static_cast<double>(count_parameters(m.config));
  if (expected_values * 8.0 != static_cast<double>(payload)) {
    throw CorruptFileError(where + "header (" + m.config.describe() + ") implies " +
                           std::to_string(static_cast<std::size_t>(expected_values) * 8) +
                           " payload bytes, found " + std::to_string(payload));
  }
  m.params = StidParams::zeros(m.config);
  for_each_tensor(m.params, [&p](const std::string&, Matrix& t) {
    for (double& x : t.values()) {
      x = std::bit_cast<double>(get_le(p, 8));
      p += 8;
    }
  });
  return m;
}

LoadedModel load_params(const std::filesystem::path& path, const StidConfig& expected) {
  LoadedModel m = load_params(path);
  if (!(m.config == expected)) {
    throw ShapeError("model file '" + path.string() + "' has config [" + m.config.describe() +
                     "], expected [" + expected.describe() + "]");
  }
  return m;
}

}  // namespace stid
