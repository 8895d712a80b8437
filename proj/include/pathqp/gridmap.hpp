// Copyright 2026 The pathqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Occupancy grid, clearance queries and footprint collision checks.
//
// Cell (ix, iy) covers [ox + ix*r, ox + (ix+1)*r) x [oy + iy*r, oy + (iy+1)*r)
// where (ox, oy) is the map origin and r the resolution. Image pixel (i, j) of
// a PGM file is cell (i, j), so image rows run in the +y direction.

#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pathqp/errors.hpp"

namespace pathqp {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct VehicleFootprint {
  double f_length = 3.9;  ///< rear axle to front edge [m]
  double r_length = 1.0;  ///< rear axle to rear edge [m]
  double width = 2.0;     ///< [m]
  double wheelbase = 2.8;
  double alpha_max = 0.6;  ///< maximum steering angle [rad]

  double k_max() const { return std::tan(alpha_max) / wheelbase; }

  void validate() const {
    if (!(f_length > 0 && r_length > 0 && width > 0 && wheelbase > 0 && alpha_max > 0)) {
      throw InputError("vehicle dimensions and steering limit must be positive");
    }
    if (!(alpha_max < M_PI / 2) || !std::isfinite(k_max())) {
      throw InputError("alpha_max must be below pi/2");
    }
  }
};

class GridMap {
 public:
  GridMap(std::size_t width, std::size_t height, double resolution, Point2 origin,
          std::vector<std::uint8_t> occupancy)
      : width_(width),
        height_(height),
        resolution_(resolution),
        origin_(origin),
        occ_(std::move(occupancy)) {
    if (width_ == 0 || height_ == 0) throw InputError("grid map must have positive size");
    if (!(resolution_ > 0) || !std::isfinite(resolution_)) {
      throw InputError("grid map resolution must be positive");
    }
    if (occ_.size() != width_ * height_) throw InputError("occupancy size != width * height");
  }

  static GridMap empty(std::size_t width, std::size_t height, double resolution,
                       Point2 origin = {}) {
    return GridMap(width, height, resolution, origin,
                   std::vector<std::uint8_t>(width * height, 0));
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double resolution() const { return resolution_; }
  Point2 origin() const { return origin_; }
  std::span<const std::uint8_t> occupancy() const { return occ_; }

  bool cell_occupied(std::size_t ix, std::size_t iy) const { return occ_[iy * width_ + ix] != 0; }

  std::optional<std::pair<std::size_t, std::size_t>> cell_of(double x, double y) const {
    const double fx = std::floor((x - origin_.x) / resolution_);
    const double fy = std::floor((y - origin_.y) / resolution_);
    if (!(fx >= 0 && fy >= 0 && fx < static_cast<double>(width_) &&
          fy < static_cast<double>(height_))) {
      return std::nullopt;
    }
    return std::make_pair(static_cast<std::size_t>(fx), static_cast<std::size_t>(fy));
  }

  Point2 cell_center(std::size_t ix, std::size_t iy) const {
    return {origin_.x + (static_cast<double>(ix) + 0.5) * resolution_,
            origin_.y + (static_cast<double>(iy) + 0.5) * resolution_};
  }

  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto v : occ_) n += (v != 0);
    return n;
  }

  bool operator==(const GridMap& o) const {
    return width_ == o.width_ && height_ == o.height_ && resolution_ == o.resolution_ &&
           origin_.x == o.origin_.x && origin_.y == o.origin_.y && occ_ == o.occ_;
  }

 private:
  std::size_t width_;
  std::size_t height_;
  double resolution_;
  Point2 origin_;
  std::vector<std::uint8_t> occ_;
};

/// Out-of-bounds points count as occupied.
inline bool is_occupied(const GridMap& map, double x, double y) {
  const auto cell = map.cell_of(x, y);
  return !cell || map.cell_occupied(cell->first, cell->second);
}

struct Clearance {
  double left = 0.0;
  double right = 0.0;
};

/// Distance along the left (+normal) and right (-normal) of the heading to the
/// last free sample before the first occupied one, capped at max_range.
inline Clearance lateral_clearance(const GridMap& map, Pose2 p, double max_range, double step) {
  if (!(max_range > 0) || !(step > 0)) throw InputError("clearance range and step must be > 0");
  if (is_occupied(map, p.x, p.y)) return {0.0, 0.0};
  const double nx = -std::sin(p.theta);
  const double ny = std::cos(p.theta);
  auto scan = [&](double sign) {
    double last_free = 0.0;
    for (std::size_t k = 1;; ++k) {
      const double d = std::min(static_cast<double>(k) * step, max_range);
      if (is_occupied(map, p.x + sign * d * nx, p.y + sign * d * ny)) return last_free;
      last_free = d;
      if (d >= max_range) return max_range;
    }
  };
  return {scan(1.0), scan(-1.0)};
}

namespace detail {

inline std::size_t sample_count(double length, double spacing) {
  return static_cast<std::size_t>(std::ceil(length / spacing)) + 1;
}

/// Body-frame samples covering the footprint rectangle at spacing <= `spacing`.
/// With perimeter_only the interior is skipped.
inline std::vector<Point2> footprint_samples(const VehicleFootprint& fp, double spacing,
                                             bool perimeter_only) {
  const double len = fp.f_length + fp.r_length;
  const std::size_t nx = sample_count(len, spacing);
  const std::size_t ny = sample_count(fp.width, spacing);
  std::vector<Point2> pts;
  pts.reserve(perimeter_only ? 2 * (nx + ny) : nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double bx = -fp.r_length + len * static_cast<double>(i) / static_cast<double>(nx - 1);
    for (std::size_t j = 0; j < ny; ++j) {
      if (perimeter_only && i != 0 && i != nx - 1 && j != 0 && j != ny - 1) continue;
      const double by =
          -0.5 * fp.width + fp.width * static_cast<double>(j) / static_cast<double>(ny - 1);
      pts.push_back({bx, by});
    }
  }
  return pts;
}

inline bool samples_free(const GridMap& map, const std::vector<Point2>& body, Pose2 pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  for (const auto& b : body) {
    if (is_occupied(map, pose.x + c * b.x - s * b.y, pose.y + s * b.x + c * b.y)) return false;
  }
  return true;
}

}  // namespace detail

/// True iff the footprint rectangle placed at every pose (rear axle center,
/// heading theta) touches no occupied cell. Sampled at <= resolution / 2.
inline bool collision_free(const GridMap& map, std::span<const Pose2> path,
                           const VehicleFootprint& fp) {
  if (path.empty()) throw InputError("collision_free: empty path");
  const auto body = detail::footprint_samples(fp, 0.5 * map.resolution(), false);
  for (const auto& p : path) {
    if (!detail::samples_free(map, body, p)) return false;
  }
  return true;
}

inline bool collision_free(const GridMap& map, const std::vector<Pose2>& path,
                           const VehicleFootprint& fp) {
  return collision_free(map, std::span<const Pose2>(path), fp);
}

/// Swept check along a straight segment. Endpoints are checked over the full
/// rectangle; intermediate poses only along the perimeter, since an obstacle
/// can only enter the moving rectangle through its boundary.
inline bool segment_collision_free(const GridMap& map, Point2 a, Point2 b, double theta_a,
                                   double theta_b, const VehicleFootprint& fp) {
  const double spacing = 0.5 * map.resolution();
  static thread_local std::vector<Point2> full_cache, rim_cache;
  static thread_local VehicleFootprint cached_fp{-1, -1, -1, -1, -1};
  static thread_local double cached_spacing = -1;
  if (cached_spacing != spacing || cached_fp.f_length != fp.f_length ||
      cached_fp.r_length != fp.r_length || cached_fp.width != fp.width) {
    full_cache = detail::footprint_samples(fp, spacing, false);
    rim_cache = detail::footprint_samples(fp, spacing, true);
    cached_fp = fp;
    cached_spacing = spacing;
  }
  if (!detail::samples_free(map, full_cache, {a.x, a.y, theta_a})) return false;
  if (!detail::samples_free(map, full_cache, {b.x, b.y, theta_b})) return false;
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const double heading = len > 0 ? std::atan2(b.y - a.y, b.x - a.x) : theta_a;
  const std::size_t n = detail::sample_count(len, spacing);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
    const Pose2 p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), heading};
    if (!detail::samples_free(map, rim_cache, p)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// PGM I/O

struct MapManifest {
  double resolution_m = 0.0;
  Point2 origin_m{};
  std::optional<std::size_t> width_px;
  std::optional<std::size_t> height_px;
};

namespace detail {

class PgmReader {
 public:
  explicit PgmReader(std::string_view b) : buf_(b) {}

  void skip_space_and_comments() {
    while (pos_ < buf_.size()) {
      const char c = buf_[pos_];
      if (c == '#') {
        while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint(const char* what) {
    skip_space_and_comments();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos_ < buf_.size() && std::isdigit(static_cast<unsigned char>(buf_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(buf_[pos_] - '0');
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw InputError(std::string("pgm: malformed header, expected ") + what);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::string_view rest() const { return buf_.substr(pos_); }

 private:
  std::string_view buf_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Decodes a P2 or P5 image. Pixels darker than 128 (after rescaling to
/// 8 bits) are occupied.
inline GridMap load_pgm(std::string_view bytes, const MapManifest& manifest) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw InputError("pgm: magic must be P2 or P5");
  }
  const bool binary = bytes[1] == '5';
  detail::PgmReader rd(bytes);
  rd.advance(2);
  const std::size_t w = rd.read_uint("width");
  const std::size_t h = rd.read_uint("height");
  const std::size_t maxval = rd.read_uint("maxval");
  if (w == 0 || h == 0) throw InputError("pgm: zero image size");
  if (maxval == 0 || maxval > 65535) throw InputError("pgm: maxval out of range");
  if ((manifest.width_px && *manifest.width_px != w) ||
      (manifest.height_px && *manifest.height_px != h)) {
    throw InputError("pgm: image is " + std::to_string(w) + "x" + std::to_string(h) +
                     " but the manifest says " +
                     std::to_string(manifest.width_px.value_or(w)) + "x" +
                     std::to_string(manifest.height_px.value_or(h)));
  }

  std::vector<std::size_t> raw(w * h);
  if (binary) {
    rd.advance(1);  // single whitespace after maxval
    const std::size_t bpp = maxval < 256 ? 1 : 2;
    const auto data = rd.rest();
    if (data.size() < w * h * bpp) throw InputError("pgm: pixel data shorter than header size");
    for (std::size_t i = 0; i < w * h; ++i) {
      if (bpp == 1) {
        raw[i] = static_cast<unsigned char>(data[i]);
      } else {
        raw[i] = (static_cast<std::size_t>(static_cast<unsigned char>(data[2 * i])) << 8) |
                 static_cast<unsigned char>(data[2 * i + 1]);
      }
    }
  } else {
    for (std::size_t i = 0; i < w * h; ++i) {
      try {
        raw[i] = rd.read_uint("pixel");
      } catch (const InputError&) {
        throw InputError("pgm: pixel data shorter than header size");
      }
    }
  }

  std::vector<std::uint8_t> occ(w * h);
  for (std::size_t iy = 0; iy < h; ++iy) {
    for (std::size_t ix = 0; ix < w; ++ix) {
      const std::size_t v8 = raw[iy * w + ix] * 255 / maxval;
      occ[iy * w + ix] = v8 < 128 ? 1 : 0;
    }
  }
  return GridMap(w, h, manifest.resolution_m, manifest.origin_m, std::move(occ));
}

/// Encodes as binary P5: occupied cells 0, free cells 255.
inline std::string save_pgm(const GridMap& map) {
  std::string out = "P5\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                    "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + map.width() * map.height());
  for (std::size_t iy = 0; iy < map.height(); ++iy) {
    for (std::size_t ix = 0; ix < map.width(); ++ix) {
      out[header + iy * map.width() + ix] =
          static_cast<char>(map.cell_occupied(ix, iy) ? 0 : 255);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic maps

struct RectObstacle {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

struct SyntheticMapSpec {
  std::size_t width_px = 0;
  std::size_t height_px = 0;
  double resolution = 0.2;
  Point2 origin{};
  std::vector<RectObstacle> obstacles;
  std::optional<std::uint64_t> seed;  ///< enables random obstacles
  double density = 0.0;               ///< target occupied fraction for random obstacles
  double min_obstacle_m = 1.0;
  double max_obstacle_m = 4.0;
};

namespace detail {

inline void fill_rect(std::vector<std::uint8_t>& occ, std::size_t w, std::size_t h,
                      double res, Point2 origin, const RectObstacle& r) {
  // Cells whose centers fall in [x_min, x_max) x [y_min, y_max).
  auto first = [&](double lo, double o) {
    return std::max(0.0, std::ceil((lo - o) / res - 0.5));
  };
  auto last = [&](double hi, double o) { return std::ceil((hi - o) / res - 0.5) - 1.0; };
  const double x0 = first(r.x_min, origin.x), x1 = last(r.x_max, origin.x);
  const double y0 = first(r.y_min, origin.y), y1 = last(r.y_max, origin.y);
  for (double fy = y0; fy <= y1 && fy < static_cast<double>(h); fy += 1.0) {
    for (double fx = x0; fx <= x1 && fx < static_cast<double>(w); fx += 1.0) {
      occ[static_cast<std::size_t>(fy) * w + static_cast<std::size_t>(fx)] = 1;
    }
  }
}

/// Uniform double in [0, 1) from the top 53 bits; portable across libraries.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline GridMap gen_synthetic(const SyntheticMapSpec& spec) {
  if (spec.width_px == 0 || spec.height_px == 0) throw InputError("synthetic map: zero size");
  if (!(spec.resolution > 0)) throw InputError("synthetic map: resolution must be positive");
  if (!(spec.density >= 0 && spec.density < 1)) {
    throw InputError("synthetic map: density must be in [0, 1)");
  }
  if (!(spec.min_obstacle_m > 0 && spec.min_obstacle_m <= spec.max_obstacle_m)) {
    throw InputError("synthetic map: need 0 < min_obstacle_m <= max_obstacle_m");
  }
  for (const auto& r : spec.obstacles) {
    if (!(r.x_min <= r.x_max && r.y_min <= r.y_max)) {
      throw InputError("synthetic map: obstacle rectangle with min > max");
    }
  }
  const std::size_t w = spec.width_px, h = spec.height_px;
  std::vector<std::uint8_t> occ(w * h, 0);
  for (const auto& r : spec.obstacles) {
    detail::fill_rect(occ, w, h, spec.resolution, spec.origin, r);
  }
  if (spec.seed && spec.density > 0) {
    std::mt19937_64 rng(*spec.seed);
    const double ext_x = static_cast<double>(w) * spec.resolution;
    const double ext_y = static_cast<double>(h) * spec.resolution;
    const std::size_t target = static_cast<std::size_t>(spec.density * static_cast<double>(w * h));
    std::size_t count = 0;
    for (auto v : occ) count += v;
    for (std::size_t guard = 0; count < target && guard < 100000; ++guard) {
      const double sx = spec.min_obstacle_m +
                        (spec.max_obstacle_m - spec.min_obstacle_m) * detail::unit_draw(rng);
      const double sy = spec.min_obstacle_m +
                        (spec.max_obstacle_m - spec.min_obstacle_m) * detail::unit_draw(rng);
      const double x = spec.origin.x + (ext_x - sx) * detail::unit_draw(rng);
      const double y = spec.origin.y + (ext_y - sy) * detail::unit_draw(rng);
      detail::fill_rect(occ, w, h, spec.resolution, spec.origin, {x, y, x + sx, y + sy});
      count = 0;
      for (auto v : occ) count += v;
    }
  }
  return GridMap(w, h, spec.resolution, spec.origin, std::move(occ));
}

}  // namespace pathqp
