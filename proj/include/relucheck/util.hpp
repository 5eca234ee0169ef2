#pragma once

#include <cstdint>
#include <string>

namespace relucheck {

/// FNV-1a over a byte range.
std::uint64_t fnv1a64(const void *data, std::size_t len);
std::uint64_t fnv1a64(const std::string &s);
std::string to_hex(std::uint64_t v);

/// SplitMix64 step; used to derive independent deterministic RNG streams.
std::uint64_t splitmix64(std::uint64_t &state);
/// Uniform double in [0, 1) from a 64-bit word (top 53 bits).
double unit_double(std::uint64_t word);

std::string iso_timestamp();

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &content);

} // namespace relucheck
