#pragma once

#include <algorithm>
#include <filesystem>
#include <vector>

#include "flowfuse/io/ply.hpp"
#include "flowfuse/geom/point_cloud.hpp"

namespace flowfuse::bench {

/// Per-axis scale S = diag(s). Positions and flow vectors map through S;
/// normals map through S^-1 and are renormalised. With `inverse` the
/// factors are replaced by their reciprocals.
struct Rescale {
  Vec3 factors = Vec3::Ones();
  bool inverse = false;

  Vec3 effective() const { return inverse ? Vec3(factors.cwiseInverse()) : factors; }

  void validate() const {
    require(is_finite(factors) && factors.minCoeff() > 0.0, "scale factors must be positive");
  }
};

/// Rescales the vertex element of a PLY in place. Properties x/y/z and
/// fx/fy/fz scale with S, nx/ny/nz with S^-1; everything else is untouched.
inline void rescale_ply(ply::File& file, const Rescale& r) {
  r.validate();
  const Vec3 s = r.effective();
  for (auto& e : file.elements) {
    if (e.name != "vertex") continue;
    const auto scale_triplet = [&](const char* a, const char* b, const char* c, const Vec3& f) {
      const char* names[] = {a, b, c};
      for (int k = 0; k < 3; ++k)
        for (auto& p : e.properties)
          if (p.name == names[k] && !p.is_list)
            for (auto& v : p.values) v *= f[k];
    };
    scale_triplet("x", "y", "z", s);
    scale_triplet("fx", "fy", "fz", s);

    ply::Property* n[3] = {nullptr, nullptr, nullptr};
    const char* nn[] = {"nx", "ny", "nz"};
    for (auto& p : e.properties)
      for (int k = 0; k < 3; ++k)
        if (p.name == nn[k] && !p.is_list) n[k] = &p;
    if (n[0] && n[1] && n[2]) {
      const Vec3 inv = s.cwiseInverse();
      for (std::size_t i = 0; i < e.count; ++i) {
        Vec3 v(n[0]->values[i] * inv.x(), n[1]->values[i] * inv.y(), n[2]->values[i] * inv.z());
        const double len = v.norm();
        if (len > 0.0) v /= len;
        for (int k = 0; k < 3; ++k) n[k]->values[i] = v[k];
      }
    }
  }
}

inline void rescale_points(std::vector<Vec3>& points, const Rescale& r) {
  r.validate();
  const Vec3 s = r.effective();
  for (auto& p : points) p = p.cwiseProduct(s);
}

/// Rescales one PLY file or every *.ply in a directory (non-recursive, sorted).
/// Returns the number of files written.
inline std::size_t rescale_path(const std::filesystem::path& in, const std::filesystem::path& out, const Rescale& r) {
  namespace fs = std::filesystem;
  r.validate();
  if (!fs::is_directory(in)) {
    auto f = ply::read_file(in.string());
    rescale_ply(f, r);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    ply::write_file(out.string(), f);
    return 1;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in))
    if (entry.is_regular_file() && entry.path().extension() == ".ply") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  require(!files.empty(), "no .ply files in " + in.string(), ErrorKind::Data);
  fs::create_directories(out);
  for (const auto& p : files) {
    auto f = ply::read_file(p.string());
    rescale_ply(f, r);
    ply::write_file((out / p.filename()).string(), f);
  }
  return files.size();
}

}  // namespace flowfuse::bench
