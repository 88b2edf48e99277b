#include "pairsim/timetags.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace pairsim::tags {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'I', 'R', 'T', 'T', 'G', '1'};

void put_u64le(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint64_t get_u64le(std::istream& in, std::uint64_t offset) {
  char buf[8];
  in.read(buf, 8);
  if (in.gcount() != 8) throw FormatError("truncated u64", offset);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

}  // namespace

void save_binary(const Stream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path, 0);
  out.write(kMagic, 8);
  put_u64le(out, stream.size());
  for (const auto& t : stream) {
    out.put(static_cast<char>(t.channel));
    put_u64le(out, t.time_ps);
  }
}

Stream load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path, 0);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("bad magic", 0);
  const std::uint64_t count = get_u64le(in, 8);
  Stream s;
  s.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t offset = 16 + i * 9;
    int ch = in.get();
    if (ch == EOF) throw FormatError("truncated record", offset);
    TimeTag t;
    t.channel = static_cast<std::uint8_t>(ch);
    t.time_ps = get_u64le(in, offset + 1);
    s.push_back(t);
  }
  return s;
}

void save_csv(const Stream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path, 0);
  out << "channel,time_ps\n";
  for (const auto& t : stream)
    out << static_cast<int>(t.channel) << "," << t.time_ps << "\n";
}

Stream load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open: " + path, 0);
  std::string line;
  if (!std::getline(in, line) || line.rfind("channel,time_ps", 0) != 0)
    throw FormatError("missing channel,time_ps header", 0);
  Stream s;
  std::uint64_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    TimeTag t;
    if (!std::getline(ss, cell, ',')) throw FormatError("bad row", offset);
    t.channel = static_cast<std::uint8_t>(std::stoul(cell));
    if (!std::getline(ss, cell, ',')) throw FormatError("bad row", offset);
    t.time_ps = std::stoull(cell);
    s.push_back(t);
    offset += line.size() + 1;
  }
  return s;
}

void save_stream(const Stream& stream, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    save_csv(stream, path);
  else
    save_binary(stream, path);
}

Stream load_stream(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return load_csv(path);
  return load_binary(path);
}

bool is_sorted(const Stream& stream) {
  for (std::size_t i = 1; i < stream.size(); ++i)
    if (stream[i].time_ps < stream[i - 1].time_ps) return false;
  return true;
}

std::uint64_t stream_hash(const Stream& stream) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](std::uint64_t byte) {
    h ^= byte & 0xff;
    h *= 0x100000001b3ull;
  };
  for (const auto& t : stream) {
    mix(t.channel);
    for (int i = 0; i < 8; ++i) mix(t.time_ps >> (8 * i));
  }
  return h;
}

}  // namespace pairsim::tags
