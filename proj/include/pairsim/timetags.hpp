#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pairsim::tags {

struct FormatError : std::runtime_error {
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " at byte " + std::to_string(byte_offset)),
        offset(byte_offset) {}
  std::uint64_t offset = 0;
};

struct TimeTag {
  std::uint8_t channel = 0;
  std::uint64_t time_ps = 0;
};

using Stream = std::vector<TimeTag>;

// Binary format: 8-byte magic "PAIRTTG1", u64 LE record count, then records
// of (u8 channel, u64 LE picoseconds).
void save_binary(const Stream& stream, const std::string& path);
Stream load_binary(const std::string& path);

// CSV alternative with a "channel,time_ps" header.
void save_csv(const Stream& stream, const std::string& path);
Stream load_csv(const std::string& path);

// Dispatch on extension: ".ttg" binary, ".csv" text.
void save_stream(const Stream& stream, const std::string& path);
Stream load_stream(const std::string& path);

bool is_sorted(const Stream& stream);

// FNV-1a over the raw records; used by the round-trip checks.
std::uint64_t stream_hash(const Stream& stream);

}  // namespace pairsim::tags
