#include "psido/array_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "psido/errors.hpp"

namespace psido {
namespace {

constexpr char kMagic[4] = {'P', 'S', 'L', 'B'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InvalidInput("PSLB stream truncated");
  return to_little(v);
}

}  // namespace

void write_pslb(std::ostream& out, const SampledFunction& f) {
  const Grid& g = f.grid();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kPslbVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis()));
  put<double>(out, g.half_extent());
  for (const Complex& v : f.values()) {
    put<double>(out, v.real());
    put<double>(out, v.imag());
  }
}

SampledFunction read_pslb(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw InvalidInput("not a PSLB stream (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kPslbVersion) throw InvalidInput("unsupported PSLB version " + std::to_string(version));
  const auto d = get<std::uint32_t>(in);
  const auto n = get<std::uint32_t>(in);
  const auto R = get<double>(in);
  Grid grid(static_cast<int>(d), n, R);
  std::vector<Complex> values(grid.size());
  for (auto& v : values) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    v = {re, im};
  }
  return SampledFunction(grid, std::move(values));
}

void write_pslb(const std::filesystem::path& path, const SampledFunction& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path);
  write_pslb(out, f);
  if (!out) throw IoError("write failed", path);
}

SampledFunction read_pslb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path);
  return read_pslb(in);
}

void write_csv(std::ostream& out, const SampledFunction& f) {
  const Grid& g = f.grid();
  const auto d = static_cast<std::size_t>(g.dim());
  for (std::size_t a = 0; a < d; ++a) out << 'i' << (a + 1) << ',';
  out << "re,im\n";
  std::vector<std::size_t> idx(d);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    g.unravel(i, idx);
    for (std::size_t a = 0; a < d; ++a) out << idx[a] << ',';
    out << f[i].real() << ',' << f[i].imag() << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const SampledFunction& f) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path);
  write_csv(out, f);
  if (!out) throw IoError("write failed", path);
}

}  // namespace psido
