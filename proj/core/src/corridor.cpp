#include "planner/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace planner {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).cross(c - a);
}

// Monotone-in-x face of a convex vertex set: the chain a traveler along
// increasing x sees on the upper (or lower) side.
std::vector<Vec2> monotone_face(std::span<const Vec2> poly, bool upper) {
  std::vector<Vec2> pts(poly.begin(), poly.end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  // Collapse equal-x runs onto the extreme vertex for the requested side.
  std::vector<Vec2> cols;
  for (const Vec2& p : pts) {
    if (!cols.empty() && std::abs(cols.back().x - p.x) < 1e-12) {
      if (upper) {
        cols.back().y = std::max(cols.back().y, p.y);
      } else {
        cols.back().y = std::min(cols.back().y, p.y);
      }
    } else {
      cols.push_back(p);
    }
  }
  std::vector<Vec2> chain;
  for (const Vec2& p : cols) {
    while (chain.size() >= 2) {
      const double turn = orient(chain[chain.size() - 2], chain.back(), p);
      if ((upper && turn >= 0.0) || (!upper && turn <= 0.0)) {
        chain.pop_back();
      } else {
        break;
      }
    }
    chain.push_back(p);
  }
  return chain;
}

// Largest contour value inside [lo, hi]; candidates are the window ends and
// the breakpoints in between, which is exact for a piecewise-linear contour.
double window_max(const PiecewiseLinear& c, double lo, double hi) {
  double m = std::max(c(lo), c(hi));
  const auto& bx = c.breakpoints();
  const auto& by = c.values();
  auto it = std::upper_bound(bx.begin(), bx.end(), lo);
  for (; it != bx.end() && *it < hi; ++it) {
    m = std::max(m, by[static_cast<std::size_t>(it - bx.begin())]);
  }
  return m;
}

// Sweeps the body length along the contour: the value at r is the contour
// maximum over [r - back, r + front], supported on the extent widened by
// front before and back after.
PiecewiseLinear dilate(const PiecewiseLinear& c, double front, double back, double step) {
  const double lo = c.x_min() - front;
  const double hi = c.x_max() + back;
  std::vector<double> knots{lo, hi};
  for (double b : c.breakpoints()) {
    knots.push_back(b - front);
    knots.push_back(b + back);
  }
  for (double r = lo + step; r < hi; r += step) knots.push_back(r);
  std::sort(knots.begin(), knots.end());
  std::vector<double> xs, ys;
  for (double r : knots) {
    if (r < lo - 1e-12 || r > hi + 1e-12) continue;
    if (!xs.empty() && r - xs.back() < 1e-9) continue;
    const double wlo = std::max(c.x_min(), r - back);
    const double whi = std::min(c.x_max(), r + front);
    xs.push_back(r);
    ys.push_back(whi >= wlo ? window_max(c, wlo, whi) : c(std::clamp(r, c.x_min(), c.x_max())));
  }
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

// Bump = the part of a contour above the base boundary, with zero-anchored
// onset ramps just outside the extent. Returns nothing when the contour stays
// below the base everywhere. Contours and base live in raise space: values
// grow toward the lane interior regardless of side.
template <class BaseFn>
std::optional<PiecewiseLinear> bump_from_samples(const std::vector<double>& s,
                                                 const std::vector<double>& w, BaseFn&& base,
                                                 double ramp) {
  std::vector<double> xs, ys;
  xs.reserve(s.size() + 2);
  ys.reserve(s.size() + 2);
  xs.push_back(s.front() - ramp);
  ys.push_back(0.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] - xs.back() < 1e-9) continue;
    const double b = std::max(0.0, w[i] - base(s[i]));
    peak = std::max(peak, b);
    xs.push_back(s[i]);
    ys.push_back(b);
  }
  xs.push_back(xs.back() + ramp);
  ys.push_back(0.0);
  if (peak < 1e-12) return std::nullopt;
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

}  // namespace

BoundaryBumps augment_boundaries(std::span<const ProtrusionSet> protrusions,
                                 const BoundarySpline1D& right, const BoundarySpline1D& left,
                                 const EgoGeometry& ego, int steps, const CorridorConfig& config) {
  if (steps < 0) {
    throw std::invalid_argument("augment_boundaries: steps must be nonnegative");
  }
  for (const ProtrusionSet& p : protrusions) {
    if (p.polygons.size() != static_cast<std::size_t>(steps) + 1) {
      throw std::invalid_argument("augment_boundaries: protrusion step count mismatch");
    }
  }

  BoundaryBumps out;
  out.right.resize(static_cast<std::size_t>(steps) + 1);
  out.left.resize(static_cast<std::size_t>(steps) + 1);

  for (int k = 0; k <= steps; ++k) {
    for (int side : {-1, +1}) {
      // Contours in raise space: larger value = deeper into the lane.
      std::vector<PiecewiseLinear> contours;
      for (const ProtrusionSet& p : protrusions) {
        if (p.eta != side) continue;
        const auto& poly = p.polygons[static_cast<std::size_t>(k)];
        if (poly.size() < 3) continue;
        const std::vector<Vec2> face = monotone_face(poly, /*upper=*/side < 0);
        if (face.size() < 2) continue;
        const double inflation = p.safety_margin + ego.width / 2.0;
        std::vector<double> xs, ws;
        xs.reserve(face.size());
        ws.reserve(face.size());
        for (const Vec2& v : face) {
          if (!xs.empty() && v.x - xs.back() < 1e-9) continue;
          xs.push_back(v.x);
          ws.push_back((side < 0 ? v.y : -v.y) + inflation);
        }
        if (xs.size() < 2) continue;
        contours.push_back(dilate(PiecewiseLinear(std::move(xs), std::move(ws)),
                                  ego.front_length, ego.back_length, config.dilation_step));
      }
      if (contours.empty()) continue;

      // Group contours whose dilated extents overlap or sit closer than the
      // ego is wide; such neighbors cannot be threaded between anyway.
      std::sort(contours.begin(), contours.end(), [](const PiecewiseLinear& a,
                                                     const PiecewiseLinear& b) {
        return a.x_min() < b.x_min();
      });
      std::vector<std::vector<const PiecewiseLinear*>> groups;
      double group_hi = -std::numeric_limits<double>::infinity();
      for (const PiecewiseLinear& c : contours) {
        if (groups.empty() || c.x_min() > group_hi + ego.width) {
          groups.emplace_back();
          group_hi = c.x_max();
        } else {
          group_hi = std::max(group_hi, c.x_max());
        }
        groups.back().push_back(&c);
      }

      auto base = [&](double s) { return side < 0 ? right.value(s) : -left.value(s); };
      auto& bucket = side < 0 ? out.right[static_cast<std::size_t>(k)]
                              : out.left[static_cast<std::size_t>(k)];
      for (const auto& group : groups) {
        std::optional<PiecewiseLinear> bump;
        if (group.size() == 1) {
          bump = bump_from_samples(group.front()->breakpoints(), group.front()->values(), base,
                                   config.ramp_length);
        } else {
          // Merged neighbors get the upper convex chain over all their
          // samples, so the composite never relaxes in the gaps between them.
          std::vector<Vec2> samples;
          for (const PiecewiseLinear* c : group) {
            for (std::size_t i = 0; i < c->breakpoints().size(); ++i) {
              samples.push_back({c->breakpoints()[i], c->values()[i]});
            }
          }
          const std::vector<Vec2> chain = monotone_face(samples, /*upper=*/true);
          std::vector<double> xs, ws;
          xs.reserve(chain.size());
          ws.reserve(chain.size());
          for (const Vec2& v : chain) {
            xs.push_back(v.x);
            ws.push_back(v.y);
          }
          bump = bump_from_samples(xs, ws, base, config.ramp_length);
        }
        if (bump) bucket.push_back(std::move(*bump));
      }
    }
  }
  return out;
}

Corridor::Corridor(std::shared_ptr<const PathSpline2D> path, BoundarySpline1D right,
                   BoundarySpline1D left, BoundaryBumps bumps, const EgoGeometry& ego,
                   double road_speed, const ControlBounds& bounds, double lateral_accel_limit,
                   const CorridorConfig& config)
    : path_(std::move(path)),
      right_(std::move(right)),
      left_(std::move(left)),
      bumps_(std::move(bumps)),
      ego_(ego),
      road_speed_(road_speed),
      bounds_(bounds),
      an_limit_(lateral_accel_limit),
      config_(config) {
  if (!path_) {
    throw std::invalid_argument("Corridor: path must not be null");
  }
  if (bumps_.right.empty() || bumps_.right.size() != bumps_.left.size()) {
    throw std::invalid_argument("Corridor: bump step counts mismatch");
  }
  const int stages = std::max(1, config_.homotopy_stages);
  schedule_.reserve(static_cast<std::size_t>(stages));
  if (stages == 1) {
    schedule_.push_back(1.0);
  } else {
    for (int i = 0; i < stages; ++i) {
      schedule_.push_back(static_cast<double>(i) / static_cast<double>(stages - 1));
    }
  }
  // Open-road speed bound by default; build_corridor installs the blockade
  // aware profile afterwards.
  speed_ = build_speed_profile(path_->length(), road_speed_, bounds_);
}

namespace {

double bumps_at(const std::vector<PiecewiseLinear>& bumps, double s) {
  double m = 0.0;
  for (const PiecewiseLinear& b : bumps) m = std::max(m, b(s));
  return m;
}

double bumps_derivative_at(const std::vector<PiecewiseLinear>& bumps, double s) {
  double best = 0.0;
  double deriv = 0.0;
  for (const PiecewiseLinear& b : bumps) {
    const double v = b(s);
    if (v > best) {
      best = v;
      deriv = b.derivative(s);
    }
  }
  return deriv;
}

int clamp_step(int k, int steps) { return std::clamp(k, 0, steps); }

}  // namespace

double Corridor::d_lo(double s, int k, double zeta) const {
  const auto& bumps = bumps_.right[static_cast<std::size_t>(clamp_step(k, steps()))];
  return right_.value(s) + zeta * bumps_at(bumps, s);
}

double Corridor::d_hi(double s, int k, double zeta) const {
  const auto& bumps = bumps_.left[static_cast<std::size_t>(clamp_step(k, steps()))];
  return left_.value(s) - zeta * bumps_at(bumps, s);
}

double Corridor::d_lo_derivative(double s, int k, double zeta) const {
  const auto& bumps = bumps_.right[static_cast<std::size_t>(clamp_step(k, steps()))];
  return right_.derivative(s) + zeta * bumps_derivative_at(bumps, s);
}

double Corridor::d_hi_derivative(double s, int k, double zeta) const {
  const auto& bumps = bumps_.left[static_cast<std::size_t>(clamp_step(k, steps()))];
  return left_.derivative(s) - zeta * bumps_derivative_at(bumps, s);
}

double Corridor::tunnel_width(double s, int k) const {
  return d_hi(s, k, 1.0) - d_lo(s, k, 1.0);
}

double Corridor::v_hi(double s, double zeta) const {
  return (1.0 - zeta) * road_speed_ + zeta * speed_.cap(s);
}

double Corridor::v_hi_derivative(double s, double zeta) const {
  return zeta * speed_.cap.derivative(s);
}

ConstraintEvaluation evaluate_corridor(const Corridor& corridor, double s, int k, double zeta) {
  ConstraintEvaluation e;
  e.d_lo = corridor.d_lo(s, k, zeta);
  e.d_hi = corridor.d_hi(s, k, zeta);
  e.v_hi = corridor.v_hi(s, zeta);
  e.s_stop = corridor.s_stop();
  e.lateral_accel_limit = corridor.lateral_accel_limit();
  e.bounds = corridor.control_bounds();
  return e;
}

namespace {

struct Interval {
  double lo;
  double hi;
};

std::vector<Interval> merge_intervals(std::vector<Interval> in) {
  std::sort(in.begin(), in.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& iv : in) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// Root between a positive and a nonpositive sample of f: Newton steps guarded
// by the shrinking bracket, bisection whenever Newton leaves it. `pos` and
// `neg` may be in either order along the axis.
template <class F, class Fp>
double refine_crossing(F&& f, Fp&& fp, double pos, double neg) {
  double s = 0.5 * (pos + neg);
  for (int it = 0; it < 40; ++it) {
    if (std::abs(pos - neg) < 1e-12) break;
    const double fs = f(s);
    if (std::abs(fs) < 1e-13) break;
    if (fs > 0.0) {
      pos = s;
    } else {
      neg = s;
    }
    const double d = fp(s);
    double cand = std::numeric_limits<double>::quiet_NaN();
    if (std::abs(d) > 1e-14) cand = s - fs / d;
    const double lo = std::min(pos, neg);
    const double hi = std::max(pos, neg);
    s = (cand > lo && cand < hi) ? cand : 0.5 * (pos + neg);
  }
  return s;
}

}  // namespace

BlockadeInfo detect_blockade(const Corridor& corridor) {
  const double L = corridor.length();
  const double wmin = corridor.config().omega_min;
  const double step = corridor.config().blockade_scan_step;

  // Regions where the base lane itself is nearly sealed; they do not depend
  // on the prediction step, so pre-scan them once at a coarse pitch.
  std::vector<Interval> base_narrow;
  for (double s = 0.0; s <= L; s += 0.5) {
    if (corridor.base_left().value(s) - corridor.base_right().value(s) <= wmin + 0.5) {
      base_narrow.push_back({std::max(0.0, s - 1.0), std::min(L, s + 1.0)});
    }
  }

  BlockadeInfo info;
  info.s_h = L;
  info.k_h = 0;
  bool any = false;
  for (int k = 0; k <= corridor.steps(); ++k) {
    std::vector<Interval> intervals = base_narrow;
    for (const PiecewiseLinear& b : corridor.bumps().right[static_cast<std::size_t>(k)]) {
      intervals.push_back({std::max(0.0, b.x_min()), std::min(L, b.x_max())});
    }
    for (const PiecewiseLinear& b : corridor.bumps().left[static_cast<std::size_t>(k)]) {
      intervals.push_back({std::max(0.0, b.x_min()), std::min(L, b.x_max())});
    }

    double s_hk = L;
    for (const Interval& iv : merge_intervals(std::move(intervals))) {
      if (iv.hi <= iv.lo) continue;
      double prev = iv.lo;
      if (corridor.tunnel_width(prev, k) - wmin <= 0.0) {
        s_hk = prev;
        break;
      }
      bool found = false;
      for (double s = iv.lo + step;; s += step) {
        const double sc = std::min(s, iv.hi);
        const double f = corridor.tunnel_width(sc, k) - wmin;
        if (f <= 0.0) {
          s_hk = refine_crossing(
              [&](double x) { return corridor.tunnel_width(x, k) - wmin; },
              [&](double x) {
                return corridor.d_hi_derivative(x, k, 1.0) - corridor.d_lo_derivative(x, k, 1.0);
              },
              prev, sc);
          found = true;
          break;
        }
        if (sc >= iv.hi) break;
        prev = sc;
      }
      if (found) break;
    }

    if (s_hk < L) {
      if (!any) info.k_h = k;
      any = true;
      info.s_h = std::min(info.s_h, s_hk);
    }
  }
  info.blocked = any;
  if (!any) {
    info.s_h = L;
    info.k_h = 0;
  }
  return info;
}

double anticipatory_stop(const Corridor& corridor, double s_h, int k_h) {
  const double tol = corridor.config().stop_return_tolerance;
  const double step = corridor.config().blockade_scan_step;

  bool right_prot = corridor.d_lo(s_h, k_h, 1.0) > corridor.base_right().value(s_h) + 1e-9;
  bool left_prot = corridor.d_hi(s_h, k_h, 1.0) < corridor.base_left().value(s_h) - 1e-9;
  if (!right_prot && !left_prot) {
    // Base lane pinch without any bump: back off on both sides.
    right_prot = left_prot = true;
  }

  // Per side, f(s) > 0 while the boundary still protrudes past the reference
  // line by more than the tolerance. Walk backward until f drops, refine the
  // crossing, and in a pinch keep the larger of the two candidates so the
  // stop clears both sides.
  double best = 0.0;
  bool have = false;
  for (int side : {-1, +1}) {
    if (side < 0 && !right_prot) continue;
    if (side > 0 && !left_prot) continue;
    auto f = [&](double s) {
      return side < 0 ? corridor.d_lo(s, k_h, 1.0) - tol : -tol - corridor.d_hi(s, k_h, 1.0);
    };
    auto fp = [&](double s) {
      return side < 0 ? corridor.d_lo_derivative(s, k_h, 1.0)
                      : -corridor.d_hi_derivative(s, k_h, 1.0);
    };

    double cand = 0.0;
    double prev = s_h;
    if (f(prev) <= 0.0) {
      cand = std::max(0.0, s_h - 1e-6);
    } else {
      for (double s = s_h - step;; s -= step) {
        const double sc = std::max(s, 0.0);
        if (f(sc) <= 0.0) {
          cand = refine_crossing(f, fp, prev, sc);
          break;
        }
        if (sc <= 0.0) {
          cand = 0.0;
          break;
        }
        prev = sc;
      }
    }
    best = have ? std::max(best, cand) : cand;
    have = true;
  }
  return std::clamp(best, 0.0, s_h);
}

SpeedProfile build_speed_profile(double s_stop, double road_speed, const ControlBounds& bounds) {
  const double brake = std::abs(bounds.u2_min);
  if (brake <= 0.0) {
    throw std::invalid_argument("build_speed_profile: braking limit must be nonzero");
  }
  SpeedProfile p;
  p.s_stop = std::max(s_stop, 0.0);
  if (p.s_stop <= 1e-12 || road_speed <= 1e-12) {
    p.v0 = 0.0;
    p.s_decl = 0.0;
    p.cap = PiecewiseLinear({0.0}, {0.0});
    return p;
  }
  const double dist = road_speed * road_speed / (2.0 * brake);
  if (p.s_stop >= dist) {
    p.v0 = road_speed;
    p.s_decl = p.s_stop - dist;
  } else {
    p.v0 = std::sqrt(2.0 * brake * p.s_stop);
    p.s_decl = 0.0;
  }
  if (p.s_decl > 1e-12) {
    p.cap = PiecewiseLinear({0.0, p.s_decl, p.s_stop}, {p.v0, p.v0, 0.0});
  } else {
    p.cap = PiecewiseLinear({0.0, p.s_stop}, {p.v0, 0.0});
  }
  return p;
}

Corridor build_corridor(std::span<const ProtrusionSet> protrusions,
                        std::shared_ptr<const PathSpline2D> path, BoundarySpline1D right,
                        BoundarySpline1D left, const EgoGeometry& ego, double road_speed,
                        const ControlBounds& bounds, double lateral_accel_limit, int steps,
                        const CorridorConfig& config) {
  BoundaryBumps bumps = augment_boundaries(protrusions, right, left, ego, steps, config);
  Corridor corridor(std::move(path), std::move(right), std::move(left), std::move(bumps), ego,
                    road_speed, bounds, lateral_accel_limit, config);
  corridor.blockade_ = detect_blockade(corridor);
  const double stop = corridor.blockade_.blocked
                          ? anticipatory_stop(corridor, corridor.blockade_.s_h,
                                              corridor.blockade_.k_h)
                          : corridor.length();
  corridor.speed_ = build_speed_profile(stop, road_speed, bounds);
  return corridor;
}

}  // namespace planner
