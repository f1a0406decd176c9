#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"
#include "usir/variance.hpp"

namespace usir {

/// On-disk array container. Layout, all integers little-endian:
///   bytes 0-3   magic "USIR"
///   bytes 4-5   u16 format version (currently 1)
///   bytes 6-7   u16 kind
///   then        u32 per dimension (2 dims, or 3 for ensembles)
///   then        float64 payload, row-major with respect to dims
///   last 4      u32 CRC32 (zlib polynomial) of the payload bytes
enum class ContainerKind : std::uint16_t {
  ImageMap = 1, // dims (depth, width)
  RfData = 2,   // dims (time samples K, elements L)
  Mask = 3,     // dims (depth, width), values 0 or 1
  Ensemble = 4, // dims (samples C, depth, width)
};

inline constexpr std::uint16_t kContainerVersion = 1;

struct Container {
  ContainerKind kind = ContainerKind::ImageMap;
  std::vector<std::uint32_t> dims;
  std::vector<double> payload;
};

namespace detail {

inline int dims_for_kind(ContainerKind kind) {
  switch (kind) {
  case ContainerKind::ImageMap:
  case ContainerKind::RfData:
  case ContainerKind::Mask:
    return 2;
  case ContainerKind::Ensemble:
    return 3;
  }
  return 0;
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

} // namespace detail

inline void write_container(const std::filesystem::path& path,
                            const Container& c) {
  const int ndims = detail::dims_for_kind(c.kind);
  if (ndims == 0)
    throw IoError(IoError::Kind::BadKind, "write_container: unknown kind");
  if (static_cast<int>(c.dims.size()) != ndims)
    throw IoError(IoError::Kind::DimsMismatch,
                  "write_container: wrong dimension count for kind");
  std::uint64_t expect = 1;
  for (std::uint32_t d : c.dims) {
    if (d == 0)
      throw IoError(IoError::Kind::DimsMismatch,
                    "write_container: zero dimension");
    expect *= d;
  }
  if (expect != c.payload.size())
    throw IoError(IoError::Kind::DimsMismatch,
                  "write_container: payload length != product of dims");

  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + 4 * c.dims.size() + 8 * c.payload.size() + 4);
  bytes.insert(bytes.end(), {'U', 'S', 'I', 'R'});
  detail::put_u16(bytes, kContainerVersion);
  detail::put_u16(bytes, static_cast<std::uint16_t>(c.kind));
  for (std::uint32_t d : c.dims)
    detail::put_u32(bytes, d);
  const std::size_t payload_off = bytes.size();
  for (double v : c.payload)
    detail::put_f64(bytes, v);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, bytes.data() + payload_off, static_cast<uInt>(8 * c.payload.size())));
  detail::put_u32(bytes, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(IoError::Kind::OpenFailed,
                  "write_container: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw IoError(IoError::Kind::WriteFailed,
                  "write_container: write failed for " + path.string());
}

inline Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(IoError::Kind::OpenFailed,
                  "read_container: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 8)
    throw IoError(IoError::Kind::Truncated, "read_container: header truncated");
  if (std::memcmp(bytes.data(), "USIR", 4) != 0)
    throw IoError(IoError::Kind::BadMagic, "read_container: bad magic");
  const std::uint16_t version = detail::get_u16(bytes.data() + 4);
  if (version != kContainerVersion)
    throw IoError(IoError::Kind::BadVersion,
                  "read_container: unsupported version " + std::to_string(version));
  const std::uint16_t kind_raw = detail::get_u16(bytes.data() + 6);
  Container c;
  c.kind = static_cast<ContainerKind>(kind_raw);
  const int ndims = detail::dims_for_kind(c.kind);
  if (ndims == 0)
    throw IoError(IoError::Kind::BadKind,
                  "read_container: unknown kind " + std::to_string(kind_raw));

  std::size_t off = 8;
  if (bytes.size() < off + 4 * static_cast<std::size_t>(ndims))
    throw IoError(IoError::Kind::Truncated, "read_container: dims truncated");
  std::uint64_t count = 1;
  for (int i = 0; i < ndims; ++i) {
    const std::uint32_t d = detail::get_u32(bytes.data() + off);
    off += 4;
    if (d == 0)
      throw IoError(IoError::Kind::DimsMismatch, "read_container: zero dimension");
    count *= d;
    c.dims.push_back(d);
  }

  const std::uint64_t payload_bytes = 8 * count;
  if (bytes.size() < off + payload_bytes + 4)
    throw IoError(IoError::Kind::Truncated, "read_container: payload truncated");
  if (bytes.size() != off + payload_bytes + 4)
    throw IoError(IoError::Kind::DimsMismatch,
                  "read_container: trailing bytes after checksum");

  const auto crc_expect = static_cast<std::uint32_t>(
      crc32(0L, bytes.data() + off, static_cast<uInt>(payload_bytes)));
  const std::uint32_t crc_stored =
      detail::get_u32(bytes.data() + off + payload_bytes);
  if (crc_expect != crc_stored)
    throw IoError(IoError::Kind::CrcMismatch, "read_container: checksum mismatch");

  c.payload.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    c.payload[i] = detail::get_f64(bytes.data() + off + 8 * i);
  return c;
}

// -- conversions between in-memory types and containers ---------------------

inline Container image_container(const ImageGrid& grid,
                                 const std::vector<double>& values,
                                 ContainerKind kind = ContainerKind::ImageMap) {
  Container c;
  c.kind = kind;
  c.dims = {static_cast<std::uint32_t>(grid.depth_px),
            static_cast<std::uint32_t>(grid.width_px)};
  c.payload = values;
  return c;
}

/// RF payload is stored time-major (dims K, L) while RFChannelData is
/// element-major in memory; transpose on the way out.
inline Container rf_container(const RFChannelData& rf) {
  Container c;
  c.kind = ContainerKind::RfData;
  c.dims = {static_cast<std::uint32_t>(rf.num_time_samples),
            static_cast<std::uint32_t>(rf.num_elements)};
  c.payload.resize(rf.values.size());
  for (int k = 0; k < rf.num_time_samples; ++k)
    for (int j = 0; j < rf.num_elements; ++j)
      c.payload[static_cast<std::size_t>(k) * rf.num_elements + j] =
          rf.sample(j, k);
  return c;
}

inline RFChannelData rf_from_container(const Container& c,
                                       double sampling_rate_hz) {
  if (c.kind != ContainerKind::RfData)
    throw IoError(IoError::Kind::BadKind, "rf_from_container: not an RF container");
  const int k_count = static_cast<int>(c.dims[0]);
  const int l_count = static_cast<int>(c.dims[1]);
  RFChannelData rf{l_count, k_count, sampling_rate_hz,
                   std::vector<double>(c.payload.size())};
  for (int k = 0; k < k_count; ++k)
    for (int j = 0; j < l_count; ++j)
      rf.values[static_cast<std::size_t>(j) * k_count + k] =
          c.payload[static_cast<std::size_t>(k) * l_count + j];
  return rf;
}

inline Container mask_container(const RegionMask& mask) {
  Container c;
  c.kind = ContainerKind::Mask;
  c.dims = {static_cast<std::uint32_t>(mask.grid.depth_px),
            static_cast<std::uint32_t>(mask.grid.width_px)};
  c.payload.resize(mask.member.size());
  for (std::size_t i = 0; i < mask.member.size(); ++i)
    c.payload[i] = mask.member[i] ? 1.0 : 0.0;
  return c;
}

inline RegionMask mask_from_container(const Container& c, const ImageGrid& grid) {
  if (c.kind != ContainerKind::Mask)
    throw IoError(IoError::Kind::BadKind, "mask_from_container: not a mask");
  if (static_cast<int>(c.dims[0]) != grid.depth_px ||
      static_cast<int>(c.dims[1]) != grid.width_px)
    throw IoError(IoError::Kind::DimsMismatch,
                  "mask_from_container: dims do not match the grid");
  RegionMask mask{grid, std::vector<std::uint8_t>(c.payload.size(), 0)};
  for (std::size_t i = 0; i < c.payload.size(); ++i)
    mask.member[i] = c.payload[i] != 0.0 ? 1 : 0;
  return mask;
}

inline Container ensemble_container(const SampleEnsemble& ens) {
  ens.validate();
  const ImageGrid& grid = ens.samples.front().grid;
  Container c;
  c.kind = ContainerKind::Ensemble;
  c.dims = {static_cast<std::uint32_t>(ens.samples.size()),
            static_cast<std::uint32_t>(grid.depth_px),
            static_cast<std::uint32_t>(grid.width_px)};
  c.payload.reserve(ens.samples.size() * ens.samples.front().values.size());
  for (const ReflectivityMap& s : ens.samples)
    c.payload.insert(c.payload.end(), s.values.begin(), s.values.end());
  return c;
}

} // namespace usir
