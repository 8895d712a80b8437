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

// Reference path generation: B-spline baseline, lattice search, spline
// smoothing and corridor extraction. Lateral offsets are positive to the left
// of the tangent.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pathqp/errors.hpp"
#include "pathqp/gridmap.hpp"

namespace pathqp {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< tangent heading, (-pi, pi]
  double kappa = 0.0;  ///< signed curvature, positive turning left
  double s = 0.0;      ///< arc length from the first point
};

/// Lateral limits at the front edge (fl <= l_front <= fr) and the rear edge
/// (rl <= l_rear <= rr) of the vehicle.
struct CorridorBounds {
  double fl = 0.0;
  double fr = 0.0;
  double rl = 0.0;
  double rr = 0.0;
};

struct ReferencePath {
  std::vector<CurvePoint> points;
  double delta_s = 0.0;
  std::vector<CorridorBounds> bounds;

  std::size_t size() const { return points.size(); }

  void validate() const {
    if (points.size() < 2) throw InputError("reference path needs at least 2 points");
    if (!(delta_s > 0)) throw InputError("reference path delta_s must be positive");
    if (bounds.size() != points.size()) throw InputError("reference path bounds size != L");
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto& b = bounds[i];
      if (!(b.fl <= b.fr) || !(b.rl <= b.rr)) {
        throw InfeasibleCorridorError("corridor bounds inverted at station " + std::to_string(i));
      }
    }
  }
};

struct LatticeSpec {
  double station_step = 2.0;
  double lateral_span = 6.0;
  double lateral_step = 0.5;
  double w_dev = 1.0;
  double w_smooth = 2.0;
  double w_clear = 0.5;
  double clearance_range = 3.0;  ///< clearance below this is penalized

  void validate() const {
    if (!(station_step > 0 && lateral_step > 0 && lateral_span > 0 && clearance_range > 0)) {
      throw InputError("lattice steps, span and clearance range must be positive");
    }
    if (!(w_dev >= 0 && w_smooth >= 0 && w_clear >= 0)) {
      throw InputError("lattice weights must be nonnegative");
    }
  }
};

inline double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// ---------------------------------------------------------------------------
// Parametric curves

struct CurveDerivatives {
  double x, y, dx, dy, ddx, ddy;
};

/// A planar curve on [param_begin, param_end] with first and second
/// derivatives.
using ParametricCurve = std::function<CurveDerivatives(double)>;

namespace detail {

inline double speed(const CurveDerivatives& d) { return std::hypot(d.dx, d.dy); }

inline CurvePoint to_curve_point(const CurveDerivatives& d, double s) {
  const double v = speed(d);
  CurvePoint p;
  p.x = d.x;
  p.y = d.y;
  p.theta = normalize_angle(std::atan2(d.dy, d.dx));
  p.kappa = v > 1e-12 ? (d.dx * d.ddy - d.dy * d.ddx) / (v * v * v) : 0.0;
  p.s = s;
  return p;
}

/// Arc-length table for a parametric curve: 5-point Gauss-Legendre on each of
/// `pieces` equal sub-intervals, inverted by safeguarded Newton.
class ArcLengthTable {
 public:
  ArcLengthTable(ParametricCurve f, double u0, double u1, std::size_t pieces)
      : f_(std::move(f)), u_(pieces + 1), s_(pieces + 1, 0.0) {
    static constexpr std::array<double, 5> kNodes{0.0, -0.5384693101056831, 0.5384693101056831,
                                                  -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> kWeights{0.5688888888888889, 0.4786286704993665,
                                                    0.4786286704993665, 0.2369268850561891,
                                                    0.2369268850561891};
    for (std::size_t k = 0; k <= pieces; ++k) {
      u_[k] = u0 + (u1 - u0) * static_cast<double>(k) / static_cast<double>(pieces);
    }
    for (std::size_t k = 0; k < pieces; ++k) {
      const double a = u_[k], b = u_[k + 1];
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      double acc = 0.0;
      for (std::size_t g = 0; g < 5; ++g) acc += kWeights[g] * speed(f_(mid + half * kNodes[g]));
      s_[k + 1] = s_[k] + half * acc;
    }
  }

  double length() const { return s_.back(); }

  /// Parameter at arc length s (clamped to the curve).
  double param_at(double s) const {
    if (s <= 0.0) return u_.front();
    if (s >= s_.back()) return u_.back();
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - s_.begin()) - 1;
    double lo = u_[k], hi = u_[k + 1];
    double u = lo + (hi - lo) * (s - s_[k]) / std::max(s_[k + 1] - s_[k], 1e-300);
    for (int iter = 0; iter < 50; ++iter) {
      const double g = segment_length(u_[k], u) + s_[k] - s;
      if (std::abs(g) < 1e-13 * std::max(1.0, s)) break;
      if (g > 0) hi = u; else lo = u;
      const double v = speed(f_(u));
      double next = v > 1e-12 ? u - g / v : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      u = next;
    }
    return u;
  }

  const ParametricCurve& curve() const { return f_; }

 private:
  double segment_length(double a, double b) const {
    static constexpr std::array<double, 5> kNodes{0.0, -0.5384693101056831, 0.5384693101056831,
                                                  -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> kWeights{0.5688888888888889, 0.4786286704993665,
                                                    0.4786286704993665, 0.2369268850561891,
                                                    0.2369268850561891};
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t g = 0; g < 5; ++g) acc += kWeights[g] * speed(f_(mid + half * kNodes[g]));
    return half * acc;
  }

  ParametricCurve f_;
  std::vector<double> u_;
  std::vector<double> s_;
};

/// Samples at uniform arc length with spacing as close to ds as possible
/// while hitting both endpoints.
inline std::vector<CurvePoint> resample_uniform(const ArcLengthTable& table, double ds) {
  const double total = table.length();
  if (!(total > 0)) throw InputError("curve has zero length");
  const std::size_t segments =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(total / ds)));
  std::vector<CurvePoint> out;
  out.reserve(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(segments);
    out.push_back(to_curve_point(table.curve()(table.param_at(s)), s));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// B-spline

/// Clamped uniform B-spline of degree p evaluated with de Boor's algorithm.
class BSpline {
 public:
  BSpline(std::size_t degree, std::vector<double> knots, std::vector<Point2> ctrl)
      : p_(degree), t_(std::move(knots)), c_(std::move(ctrl)) {
    if (t_.size() != c_.size() + p_ + 1) throw InputError("bspline: knot count mismatch");
  }

  static BSpline clamped_uniform(std::vector<Point2> ctrl, std::size_t degree = 3) {
    if (ctrl.size() < degree + 1) {
      throw InputError("bspline: need at least " + std::to_string(degree + 1) + " waypoints");
    }
    const std::size_t n = ctrl.size();
    std::vector<double> knots(n + degree + 1);
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (i <= degree) {
        knots[i] = 0.0;
      } else if (i >= n) {
        knots[i] = static_cast<double>(n - degree);
      } else {
        knots[i] = static_cast<double>(i - degree);
      }
    }
    return BSpline(degree, std::move(knots), std::move(ctrl));
  }

  double begin() const { return t_[p_]; }
  double end() const { return t_[c_.size()]; }
  std::size_t degree() const { return p_; }

  Point2 operator()(double u) const {
    if (c_.empty()) return {0.0, 0.0};
    u = std::clamp(u, begin(), end());
    std::size_t k = p_;
    while (k + 1 < c_.size() && u >= t_[k + 1]) ++k;
    std::vector<Point2> d(c_.begin() + static_cast<std::ptrdiff_t>(k - p_),
                          c_.begin() + static_cast<std::ptrdiff_t>(k + 1));
    for (std::size_t r = 1; r <= p_; ++r) {
      for (std::size_t j = p_; j >= r; --j) {
        const std::size_t i = j + k - p_;
        const double den = t_[i + p_ + 1 - r] - t_[i];
        const double a = den > 0 ? (u - t_[i]) / den : 0.0;
        d[j].x = (1.0 - a) * d[j - 1].x + a * d[j].x;
        d[j].y = (1.0 - a) * d[j - 1].y + a * d[j].y;
      }
    }
    return d[p_];
  }

  /// Hodograph: a degree p-1 spline on the inner knots.
  BSpline derivative() const {
    if (p_ == 0) throw InputError("bspline: derivative of degree 0");
    std::vector<Point2> q(c_.size() - 1);
    for (std::size_t i = 0; i + 1 < c_.size(); ++i) {
      const double den = t_[i + p_ + 1] - t_[i + 1];
      const double f = den > 0 ? static_cast<double>(p_) / den : 0.0;
      q[i] = {f * (c_[i + 1].x - c_[i].x), f * (c_[i + 1].y - c_[i].y)};
    }
    return BSpline(p_ - 1, std::vector<double>(t_.begin() + 1, t_.end() - 1), std::move(q));
  }

 private:
  std::size_t p_;
  std::vector<double> t_;
  std::vector<Point2> c_;
};

/// Cubic B-spline with the waypoints as control points, sampled at uniform
/// arc length close to sample_ds.
inline std::vector<CurvePoint> bspline_generate(const std::vector<Point2>& waypoints,
                                                double sample_ds) {
  if (waypoints.size() < 4) throw InputError("bspline_generate: need at least 4 waypoints");
  if (!(sample_ds > 0)) throw InputError("bspline_generate: sample_ds must be positive");
  auto curve = std::make_shared<BSpline>(BSpline::clamped_uniform(waypoints));
  auto d1 = std::make_shared<BSpline>(curve->derivative());
  auto d2 = std::make_shared<BSpline>(d1->derivative());
  ParametricCurve f = [curve, d1, d2](double u) {
    const Point2 p = (*curve)(u), v = (*d1)(u), a = (*d2)(u);
    return CurveDerivatives{p.x, p.y, v.x, v.y, a.x, a.y};
  };
  const std::size_t pieces = 32 * (waypoints.size() - 3);
  detail::ArcLengthTable table(f, curve->begin(), curve->end(), pieces);
  auto pts = detail::resample_uniform(table, sample_ds);
  pts.front().x = waypoints.front().x;
  pts.front().y = waypoints.front().y;
  pts.back().x = waypoints.back().x;
  pts.back().y = waypoints.back().y;
  return pts;
}

// ---------------------------------------------------------------------------
// Natural cubic spline

/// Natural cubic spline through a polyline, parameterized by cumulative chord
/// length.
class SmoothCurve {
 public:
  explicit SmoothCurve(const std::vector<Point2>& pts) {
    if (pts.size() < 3) throw InputError("cubic_spline_smooth: need at least 3 points");
    t_.assign(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double h = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
      if (!(h > 0)) {
        throw InputError("cubic_spline_smooth: duplicate consecutive points at index " +
                         std::to_string(i));
      }
      t_[i] = t_[i - 1] + h;
    }
    x_.resize(pts.size());
    y_.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      x_[i] = pts[i].x;
      y_[i] = pts[i].y;
    }
    mx_ = second_derivatives(x_);
    my_ = second_derivatives(y_);
  }

  double param_end() const { return t_.back(); }
  std::size_t knots() const { return t_.size(); }

  CurveDerivatives at_param(double t) const {
    t = std::clamp(t, t_.front(), t_.back());
    std::size_t k = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) -
                                             t_.begin());
    k = std::min(std::max<std::size_t>(k, 1), t_.size() - 1) - 1;
    const double h = t_[k + 1] - t_[k];
    const double a = (t_[k + 1] - t) / h, b = (t - t_[k]) / h;
    auto eval = [&](const std::vector<double>& v, const std::vector<double>& m,
                    double& f, double& d, double& dd) {
      f = a * v[k] + b * v[k + 1] + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6;
      d = (v[k + 1] - v[k]) / h - (3 * a * a - 1) / 6 * h * m[k] + (3 * b * b - 1) / 6 * h * m[k + 1];
      dd = a * m[k] + b * m[k + 1];
    };
    CurveDerivatives out{};
    eval(x_, mx_, out.x, out.dx, out.ddx);
    eval(y_, my_, out.y, out.dy, out.ddy);
    return out;
  }

  std::vector<CurvePoint> resample(double ds) const {
    if (!(ds > 0)) throw InputError("cubic_spline_smooth: sample_ds must be positive");
    ParametricCurve f = [this](double t) { return at_param(t); };
    detail::ArcLengthTable table(f, 0.0, t_.back(), 16 * (t_.size() - 1));
    return detail::resample_uniform(table, ds);
  }

 private:
  std::vector<double> second_derivatives(const std::vector<double>& v) const {
    const std::size_t n = v.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    // Thomas algorithm on the interior unknowns.
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = t_[i] - t_[i - 1], h1 = t_[i + 1] - t_[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
      if (i > 1) {
        const double w = h0 / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
      if (i == 1) break;
    }
    return m;
  }

  std::vector<double> t_, x_, y_, mx_, my_;
};

inline std::vector<CurvePoint> cubic_spline_smooth(const std::vector<Point2>& polyline,
                                                   double sample_ds) {
  return SmoothCurve(polyline).resample(sample_ds);
}

// ---------------------------------------------------------------------------
// Curve queries

/// Linear interpolation of a sampled curve at arc length s (clamped).
inline CurvePoint interpolate_at(const std::vector<CurvePoint>& curve, double s) {
  if (curve.empty()) throw InputError("interpolate_at: empty curve");
  if (s <= curve.front().s) return curve.front();
  if (s >= curve.back().s) return curve.back();
  const auto it = std::upper_bound(curve.begin(), curve.end(), s,
                                   [](double v, const CurvePoint& p) { return v < p.s; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double t = (s - a.s) / (b.s - a.s);
  CurvePoint p;
  p.x = a.x + t * (b.x - a.x);
  p.y = a.y + t * (b.y - a.y);
  p.theta = normalize_angle(a.theta + t * normalize_angle(b.theta - a.theta));
  p.kappa = a.kappa + t * (b.kappa - a.kappa);
  p.s = s;
  return p;
}

/// Frenet coordinates (l, phi) of a pose relative to its nearest sample.
inline std::pair<double, double> project_pose(const std::vector<CurvePoint>& curve, Pose2 pose) {
  if (curve.empty()) throw InputError("project_pose: empty curve");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double d = std::hypot(pose.x - curve[i].x, pose.y - curve[i].y);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const auto& c = curve[best];
  const double l = -std::sin(c.theta) * (pose.x - c.x) + std::cos(c.theta) * (pose.y - c.y);
  return {l, normalize_angle(pose.theta - c.theta)};
}

// ---------------------------------------------------------------------------
// Lattice search

struct LatticeResult {
  std::vector<Point2> polyline;
  std::vector<double> offsets;
  double cost = 0.0;
};

/// Dijkstra over (station, lateral offset) nodes. Nodes whose footprint hits
/// an obstacle are dropped, edges are swept segment checks. Edge cost into
/// node (i+1, b) from (i, a) is
///   w_dev * o_b^2 + w_smooth * (o_b - o_a)^2 + w_clear * max(0, D - c_b)^2
/// where c_b is the smaller lateral clearance at the node and D the
/// lattice clearance range.
inline LatticeResult dp_search(const std::vector<CurvePoint>& curve, const GridMap& map,
                               const LatticeSpec& spec, const VehicleFootprint& fp) {
  spec.validate();
  if (curve.size() < 2) throw InputError("dp_search: curve needs at least 2 points");
  const double total = curve.back().s - curve.front().s;
  if (!(total > 0)) throw InputError("dp_search: curve has zero length");
  const std::size_t n_st =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(total / spec.station_step))) +
      1;
  const std::size_t half = static_cast<std::size_t>(std::llround(spec.lateral_span / spec.lateral_step));
  const std::size_t n_off = 2 * half + 1;
  auto offset = [&](std::size_t j) {
    return (static_cast<double>(j) - static_cast<double>(half)) * spec.lateral_step;
  };

  std::vector<CurvePoint> st(n_st);
  for (std::size_t i = 0; i < n_st; ++i) {
    st[i] = interpolate_at(curve, curve.front().s + total * static_cast<double>(i) /
                                                      static_cast<double>(n_st - 1));
  }
  auto node_pos = [&](std::size_t i, std::size_t j) {
    const double o = offset(j);
    return Point2{st[i].x - o * std::sin(st[i].theta), st[i].y + o * std::cos(st[i].theta)};
  };

  const double spacing = 0.5 * map.resolution();
  const auto full = detail::footprint_samples(fp, spacing, false);
  const auto rim = detail::footprint_samples(fp, spacing, true);

  std::vector<std::uint8_t> node_ok(n_st * n_off, 0);
  std::vector<double> node_pen(n_st * n_off, 0.0);
  for (std::size_t i = 0; i < n_st; ++i) {
    for (std::size_t j = 0; j < n_off; ++j) {
      const Point2 p = node_pos(i, j);
      const Pose2 pose{p.x, p.y, st[i].theta};
      if (!detail::samples_free(map, full, pose)) continue;
      node_ok[i * n_off + j] = 1;
      const auto c = lateral_clearance(map, pose, spec.clearance_range, spacing);
      const double gap = std::max(0.0, spec.clearance_range - std::min(c.left, c.right));
      node_pen[i * n_off + j] = gap * gap;
    }
  }
  if (!node_ok[half]) throw SearchFailure("dp_search: start pose is in collision");

  auto edge_free = [&](std::size_t i, std::size_t a, std::size_t b) {
    const Point2 pa = node_pos(i, a), pb = node_pos(i + 1, b);
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const double heading = std::atan2(pb.y - pa.y, pb.x - pa.x);
    const std::size_t n = detail::sample_count(len, spacing);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(n - 1);
      if (!detail::samples_free(map, rim, {pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y),
                                           heading})) {
        return false;
      }
    }
    return true;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n_st * n_off, inf);
  std::vector<std::size_t> prev(n_st * n_off, static_cast<std::size_t>(-1));
  std::vector<std::uint8_t> done(n_st * n_off, 0);
  // Key: (cost, |offset| index distance, station, offset index).
  using Key = std::tuple<double, std::size_t, std::size_t, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> pq;
  auto absoff = [&](std::size_t j) { return j > half ? j - half : half - j; };
  dist[half] = 0.0;
  pq.push({0.0, 0, 0, half});
  while (!pq.empty()) {
    const auto [d, ao, i, j] = pq.top();
    pq.pop();
    const std::size_t id = i * n_off + j;
    if (done[id]) continue;
    done[id] = 1;
    if (i + 1 == n_st) continue;
    for (std::size_t b = 0; b < n_off; ++b) {
      const std::size_t nb = (i + 1) * n_off + b;
      if (!node_ok[nb] || done[nb]) continue;
      const double ob = offset(b), da = ob - offset(j);
      const double nd = d + spec.w_dev * ob * ob + spec.w_smooth * da * da +
                        spec.w_clear * node_pen[nb];
      if (nd < dist[nb] && edge_free(i, j, b)) {
        dist[nb] = nd;
        prev[nb] = id;
        pq.push({nd, absoff(b), i + 1, b});
      }
    }
  }

  std::size_t goal = static_cast<std::size_t>(-1);
  for (std::size_t j = 0; j < n_off; ++j) {
    const std::size_t id = (n_st - 1) * n_off + j;
    if (dist[id] == inf) continue;
    if (goal == static_cast<std::size_t>(-1) || dist[id] < dist[goal] ||
        (dist[id] == dist[goal] && absoff(j) < absoff(goal - (n_st - 1) * n_off))) {
      goal = id;
    }
  }
  if (goal == static_cast<std::size_t>(-1)) {
    std::size_t blocked = 0;
    for (std::size_t i = 0; i < n_st; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < n_off; ++j) any = any || dist[i * n_off + j] < inf;
      if (!any) {
        blocked = i;
        break;
      }
    }
    throw SearchFailure("dp_search: no collision-free path; blocked at station " +
                        std::to_string(blocked) + " (s = " + std::to_string(st[blocked].s) +
                        " m)");
  }

  LatticeResult res;
  res.cost = dist[goal];
  res.offsets.assign(n_st, 0.0);
  res.polyline.assign(n_st, {});
  for (std::size_t id = goal; id != static_cast<std::size_t>(-1); id = prev[id]) {
    const std::size_t i = id / n_off, j = id % n_off;
    res.offsets[i] = offset(j);
    res.polyline[i] = node_pos(i, j);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Reference processing

struct ProcessOptions {
  double max_range = 5.0;      ///< clearance scan range [m]
  double step = 0.0;           ///< clearance scan step; 0 = resolution / 2
  double safety_margin = 0.0;  ///< extra shrink on every bound [m]
};

/// Resamples to exactly L points at spacing delta_s and derives corridor
/// bounds from the clearance at the front and rear edge projections.
inline ReferencePath process_reference(const std::vector<CurvePoint>& curve, const GridMap& map,
                                       const VehicleFootprint& fp, std::size_t L, double delta_s,
                                       const ProcessOptions& opt = {}) {
  fp.validate();
  if (L < 2) throw InputError("process_reference: L must be at least 2");
  if (!(delta_s > 0)) throw InputError("process_reference: delta_s must be positive");
  if (curve.size() < 2) throw InputError("process_reference: curve needs at least 2 points");
  const double need = static_cast<double>(L - 1) * delta_s;
  const double have = curve.back().s - curve.front().s;
  if (have + 1e-9 < need) {
    throw InputError("process_reference: curve length " + std::to_string(have) +
                     " m is shorter than (L-1)*delta_s = " + std::to_string(need) + " m");
  }
  const double step = opt.step > 0 ? opt.step : 0.5 * map.resolution();
  const double half_w = 0.5 * fp.width + opt.safety_margin;

  ReferencePath ref;
  ref.delta_s = delta_s;
  ref.points.resize(L);
  ref.bounds.resize(L);
  for (std::size_t i = 0; i < L; ++i) {
    const double s = static_cast<double>(i) * delta_s;
    CurvePoint p = interpolate_at(curve, curve.front().s + s);
    p.s = s;
    ref.points[i] = p;
    const double c = std::cos(p.theta), sn = std::sin(p.theta);
    const auto front = lateral_clearance(
        map, {p.x + fp.f_length * c, p.y + fp.f_length * sn, p.theta}, opt.max_range, step);
    const auto rear = lateral_clearance(
        map, {p.x - fp.r_length * c, p.y - fp.r_length * sn, p.theta}, opt.max_range, step);
    CorridorBounds b;
    b.fl = -(front.right - half_w);
    b.fr = front.left - half_w;
    b.rl = -(rear.right - half_w);
    b.rr = rear.left - half_w;
    if (b.fl > b.fr || b.rl > b.rr) {
      throw InfeasibleCorridorError("corridor narrower than the vehicle at station " +
                                    std::to_string(i) + " (s = " + std::to_string(s) + " m)");
    }
    ref.bounds[i] = b;
  }
  return ref;
}

}  // namespace pathqp
