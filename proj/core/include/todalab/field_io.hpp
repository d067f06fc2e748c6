#pragma once

#include <filesystem>
#include <string>

#include "todalab/torus.hpp"

namespace todalab {

// Binary field layout: 32-byte header
//   bytes  0..7   magic "TDLFLD01"
//   bytes  8..15  n as little-endian uint64
//   bytes 16..23  L1 as little-endian IEEE-754 double
//   bytes 24..31  L2 as little-endian IEEE-754 double
// followed by n*n little-endian doubles in row-major order.

void write_field(const std::filesystem::path& path, const GridField& f);
GridField read_field(const std::filesystem::path& path);

std::string encode_field(const GridField& f);
GridField decode_field(const std::string& bytes);

}  // namespace todalab
