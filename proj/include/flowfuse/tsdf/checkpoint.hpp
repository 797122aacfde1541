#pragma once

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "flowfuse/tsdf/volume.hpp"

namespace flowfuse {

// Layout (all little-endian):
//   char[8]   magic "FFTSDF01"
//   int32[3]  resolution nx, ny, nz
//   float64   voxel_size
//   float64[3] origin (center of voxel 0,0,0)
//   float64   truncation
//   float64   max_weight
//   float32[n] tsdf, x fastest
//   float32[n] weight
inline constexpr std::array<char, 8> kCheckpointMagic = {'F', 'F', 'T', 'S', 'D', 'F', '0', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace detail {
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorKind::Data, "checkpoint: truncated file");
  return v;
}
}  // namespace detail

inline void write_checkpoint(std::ostream& os, const TsdfVolume& vol) {
  const auto& g = vol.geometry();
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  for (int a = 0; a < 3; ++a) detail::put<std::int32_t>(os, g.dims[a]);
  detail::put<double>(os, g.voxel_size);
  for (int a = 0; a < 3; ++a) detail::put<double>(os, g.origin[a]);
  detail::put<double>(os, vol.truncation());
  detail::put<double>(os, vol.max_weight());
  for (double t : vol.tsdf_values()) detail::put<float>(os, static_cast<float>(t));
  for (double w : vol.weight_values()) detail::put<float>(os, static_cast<float>(w));
}

inline TsdfVolume read_checkpoint(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kCheckpointMagic) fail(ErrorKind::Data, "checkpoint: bad magic");
  GridGeometry g;
  for (int a = 0; a < 3; ++a) g.dims[a] = detail::get<std::int32_t>(is);
  g.voxel_size = detail::get<double>(is);
  for (int a = 0; a < 3; ++a) g.origin[a] = detail::get<double>(is);
  const double delta = detail::get<double>(is);
  const double max_weight = detail::get<double>(is);
  require(delta == g.truncation(), "checkpoint: truncation is not 4 voxels", ErrorKind::Data);
  TsdfVolume vol(g, max_weight);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) vol.tsdf(i) = detail::get<float>(is);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) vol.weight(i) = detail::get<float>(is);
  return vol;
}

inline void save_checkpoint(const std::string& path, const TsdfVolume& vol) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::Data, "cannot write " + path);
  write_checkpoint(os, vol);
}

inline TsdfVolume load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Data, "cannot read " + path);
  return read_checkpoint(is);
}

}  // namespace flowfuse
