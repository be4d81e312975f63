// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <string>

#include <zlib.h>

#include "bgh/balanced_model.hpp"
#include "bgh/error.hpp"
#include "bgh/io.hpp"

namespace bgh {

namespace {

constexpr char kMagic[4] = {'B', 'G', 'H', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 24;
constexpr std::size_t kCrcSize = 4;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[at + static_cast<std::size_t>(i)];
  return v;
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize(const BalancedModel& model) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + model.breakpoints().size() * 8 + kCrcSize);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(model.q()));
  out.push_back(0);
  out.push_back(0);
  put_u64(out, model.n_points());
  put_u64(out, model.total_weight());
  for (auto s : model.breakpoints()) put_u64(out, s);
  const std::uint32_t crc = crc_of(out);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  return out;
}

BalancedModel deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize + kCrcSize) throw LoadError("truncated header");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw LoadError("bad magic");
  if (bytes[4] != kVersion) {
    throw LoadError("unsupported version " + std::to_string(bytes[4]));
  }
  const int q = bytes[5];
  if (q < 1 || q > kMaxBalanceDepth) throw LoadError("q=" + std::to_string(q) + " out of range");
  if (bytes[6] != 0 || bytes[7] != 0) throw LoadError("reserved bytes not zero");
  const std::size_t count = (std::size_t{1} << q) + 1;
  const std::size_t expected = kHeaderSize + 8 * count + kCrcSize;
  if (bytes.size() != expected) {
    throw LoadError("size mismatch: expected " + std::to_string(expected) + " bytes, got " +
                    std::to_string(bytes.size()));
  }
  const std::size_t body = expected - kCrcSize;
  std::uint32_t stored = 0;
  for (int i = 3; i >= 0; --i) stored = (stored << 8) | bytes[body + static_cast<std::size_t>(i)];
  if (stored != crc_of(bytes.first(body))) throw LoadError("checksum mismatch");

  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = get_u64(bytes, kHeaderSize + 8 * i);
  try {
    return BalancedModel::from_breakpoints(q, std::move(s), get_u64(bytes, 8), get_u64(bytes, 16));
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("invariant violated: ") + e.what());
  }
}

void save(const BalancedModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize(model);
  write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

BalancedModel load(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  try {
    return deserialize({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace bgh
