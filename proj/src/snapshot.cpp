#include "motsim/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace motsim {

namespace {

constexpr std::array<char, 4> kMagic = {'K', 'S', 'F', '1'};

void put_u32_le(std::string& buf, std::uint32_t x) {
  for (int k = 0; k < 4; ++k) buf.push_back(static_cast<char>((x >> (8 * k)) & 0xff));
}

void put_f64_le(std::string& buf, double d) {
  std::uint64_t x = std::bit_cast<std::uint64_t>(d);
  for (int k = 0; k < 8; ++k) buf.push_back(static_cast<char>((x >> (8 * k)) & 0xff));
}

std::uint32_t get_u32_le(const char* p) {
  std::uint32_t x = 0;
  for (int k = 0; k < 4; ++k)
    x |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[k])) << (8 * k);
  return x;
}

double get_f64_le(const char* p) {
  std::uint64_t x = 0;
  for (int k = 0; k < 8; ++k)
    x |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[k])) << (8 * k);
  return std::bit_cast<double>(x);
}

void put_field_le(std::string& buf, const ScalarField& f) {
  for (double d : f.data()) put_f64_le(buf, d);
}

}  // namespace

void write_snapshot(const FieldState& state, const std::filesystem::path& path) {
  const GridSpec& g = state.u.grid();
  std::string buf;
  buf.reserve(4 + 8 + 24 + 24 * g.cell_count());
  buf.append(kMagic.data(), kMagic.size());
  put_u32_le(buf, static_cast<std::uint32_t>(g.nx));
  put_u32_le(buf, static_cast<std::uint32_t>(g.ny));
  put_f64_le(buf, g.lx);
  put_f64_le(buf, g.ly);
  put_f64_le(buf, state.t);
  put_field_le(buf, state.u);
  put_field_le(buf, state.v);
  put_field_le(buf, state.w);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open snapshot for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing snapshot: " + path.string());
}

FieldState read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 36) throw FormatError("snapshot truncated: " + path.string());
  if (std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0)
    throw FormatError("snapshot magic mismatch: " + path.string());

  GridSpec g;
  g.nx = static_cast<int>(get_u32_le(buf.data() + 4));
  g.ny = static_cast<int>(get_u32_le(buf.data() + 8));
  g.lx = get_f64_le(buf.data() + 12);
  g.ly = get_f64_le(buf.data() + 20);
  const double t = get_f64_le(buf.data() + 28);
  if (g.nx <= 0 || g.ny <= 0) throw FormatError("snapshot grid invalid: " + path.string());
  const std::size_t n = g.cell_count();
  if (buf.size() != 36 + 24 * n)
    throw FormatError("snapshot size mismatch: " + path.string());

  FieldState s;
  s.t = t;
  s.u = ScalarField(g);
  s.v = ScalarField(g);
  s.w = ScalarField(g);
  const char* p = buf.data() + 36;
  for (double& d : s.u.data()) { d = get_f64_le(p); p += 8; }
  for (double& d : s.v.data()) { d = get_f64_le(p); p += 8; }
  for (double& d : s.w.data()) { d = get_f64_le(p); p += 8; }
  return s;
}

}  // namespace motsim
