#pragma once

#include <filesystem>
#include <string>

#include "fracbound/engine.hpp"

namespace fracbound {

// Scan file layout (all integers little-endian):
//   bytes 0..3   magic "FTBS"
//   byte  4      schema version (currently 1)
//   bytes 5..8   manifest length L, uint32
//   bytes ...    manifest, L bytes of UTF-8 "key=value\n" lines
//   bytes ...    classification bits, ceil((2^n_max + 1)/8) bytes, LSB-first,
//                padded with zero bits; set bit = Divergent
//   bytes ...    optional intensities, (2^n_max + 1) binary64 values
//   last 8 bytes FNV-1a 64-bit checksum of everything before it
//
// Writes go to a temporary file renamed into place.

void write_scan(const DivergenceScan& scan, const std::filesystem::path& path);
DivergenceScan read_scan(const std::filesystem::path& path);

// Manifest text exactly as persisted (doubles at 17 significant digits, so
// the round trip is lossless).
std::string manifest_text(const DivergenceScan& scan);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace fracbound
