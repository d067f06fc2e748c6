#include "todalab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "todalab/errors.hpp"

namespace todalab {

namespace {

constexpr char kMagic[8] = {'T', 'D', 'L', 'F', 'L', 'D', '0', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}

void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(const std::string& in, std::size_t at) { return std::bit_cast<double>(get_u64(in, at)); }

}  // namespace

std::string encode_field(const GridField& f) {
  const FlatTorus& t = f.torus();
  std::string out;
  out.reserve(32 + 8 * f.size());
  out.append(kMagic, 8);
  put_u64(out, t.n());
  put_f64(out, t.L1());
  put_f64(out, t.L2());
  for (double x : f.values()) put_f64(out, x);
  return out;
}

GridField decode_field(const std::string& bytes) {
  if (bytes.size() < 32 || std::memcmp(bytes.data(), kMagic, 8) != 0) throw InvalidInput("field: bad header");
  const std::uint64_t n = get_u64(bytes, 8);
  if (n > (1u << 16)) throw InvalidInput("field: grid size out of range");
  const FlatTorus t(static_cast<std::size_t>(n), get_f64(bytes, 16), get_f64(bytes, 24));
  if (bytes.size() != 32 + 8 * t.size()) throw InvalidInput("field: payload length mismatch");
  std::vector<double> v(t.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = get_f64(bytes, 32 + 8 * k);
  return GridField(t, std::move(v));
}

void write_field(const std::filesystem::path& path, const GridField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("field: cannot open " + path.string() + " for writing");
  const std::string b = encode_field(f);
  os.write(b.data(), static_cast<std::streamsize>(b.size()));
}

GridField read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("field: cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return decode_field(ss.str());
}

}  // namespace todalab
