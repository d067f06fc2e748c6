#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "todalab/errors.hpp"
#include "todalab/field_io.hpp"

using namespace todalab;

TEST_CASE("field round trip is bit exact") {
  FlatTorus t(32, 2.0, 0.5);
  std::mt19937_64 rng(3);
  GridField f = fixtures::smooth_field(t, rng, 3.0);
  f[5] = -0.0;
  f[6] = 1e-310;
  const auto path = std::filesystem::temp_directory_path() / "todalab_field_roundtrip.bin";
  write_field(path, f);
  const GridField g = read_field(path);
  std::filesystem::remove(path);
  CHECK(g.torus().n() == 32);
  CHECK(g.torus().L1() == 2.0);
  CHECK(g.torus().L2() == 0.5);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::bit_cast<std::uint64_t>(g[k]) == std::bit_cast<std::uint64_t>(f[k]));
}

TEST_CASE("header layout") {
  FlatTorus t(16);
  GridField f(t, 1.5);
  const std::string b = encode_field(f);
  REQUIRE(b.size() == 32 + 8 * 256);
  CHECK(b.substr(0, 8) == "TDLFLD01");
  CHECK(static_cast<unsigned char>(b[8]) == 16);
  for (int i = 9; i < 16; ++i) CHECK(b[i] == 0);
  double l1 = 0, v = 0;
  std::memcpy(&l1, b.data() + 16, 8);
  std::memcpy(&v, b.data() + 32, 8);
  CHECK(l1 == 1.0);
  CHECK(v == 1.5);
}

TEST_CASE("malformed input is rejected") {
  FlatTorus t(16);
  std::string b = encode_field(GridField(t, 0.0));
  std::string bad = b;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_field(bad), InvalidInput);
  CHECK_THROWS_AS(decode_field(b.substr(0, b.size() - 1)), InvalidInput);
  CHECK_THROWS_AS(decode_field("short"), InvalidInput);
  CHECK_THROWS_AS(read_field("/nonexistent/field.bin"), InvalidInput);
}
