#pragma once

#include <memory>
#include <span>
#include <vector>

#include "planner/dynamics.hpp"
#include "planner/piecewise_linear.hpp"
#include "planner/projection.hpp"
#include "planner/spline.hpp"

namespace planner {

// Body extents around the vehicle reference point.
struct EgoGeometry {
  double width = 1.8;
  double front_length = 3.0;  // reference point to front bumper
  double back_length = 1.0;   // reference point to rear bumper
};

struct CorridorConfig {
  double omega_min = 0.05;           // corridor width that counts as sealed [m]
  int homotopy_stages = 20;          // number of relaxation stages Z
  double contour_sample_step = 0.5;  // bump sampling density along s [m]
  double dilation_step = 0.25;       // sampling used while sweeping the body length [m]
  double ramp_length = 0.5;          // bump onset ramp outside the inflated extent [m]
  double blockade_scan_step = 0.05;  // bracketing grid for sealed-width search [m]
  double stop_return_tolerance = 0.05;  // |boundary offset| ending the stop backtrack [m]
};

struct BlockadeInfo {
  bool blocked = false;
  double s_h = 0.0;  // closest arc length where the corridor seals
  int k_h = 0;       // earliest prediction step where it happens
};

struct SpeedProfile {
  double v0 = 0.0;      // plateau speed
  double s_decl = 0.0;  // deceleration onset
  double s_stop = 0.0;  // standstill point
  PiecewiseLinear cap;  // resulting speed bound over s
};

// Per-step nonnegative boundary offsets: the right boundary is raised by its
// bumps, the left boundary lowered. Keeping the offsets separate from the base
// splines guarantees augmentation can only shrink the corridor.
struct BoundaryBumps {
  std::vector<std::vector<PiecewiseLinear>> right;  // [step][group]
  std::vector<std::vector<PiecewiseLinear>> left;
};

// Drivable tunnel for one planning instant: base lane boundaries, per-step
// obstacle bumps, the homotopy schedule between the two, a blockade record,
// and the stop-anticipating speed bound.
class Corridor {
 public:
  Corridor(std::shared_ptr<const PathSpline2D> path, BoundarySpline1D right, BoundarySpline1D left,
           BoundaryBumps bumps, const EgoGeometry& ego, double road_speed,
           const ControlBounds& bounds, double lateral_accel_limit, const CorridorConfig& config);

  // Blended lateral bounds at arc length s, prediction step k, homotopy
  // parameter zeta in [0, 1] (0 = base lane, 1 = fully augmented).
  double d_lo(double s, int k, double zeta) const;
  double d_hi(double s, int k, double zeta) const;
  double d_lo_derivative(double s, int k, double zeta) const;
  double d_hi_derivative(double s, int k, double zeta) const;

  // Fully augmented corridor width.
  double tunnel_width(double s, int k) const;

  // Blended speed bound and its s derivative.
  double v_hi(double s, double zeta) const;
  double v_hi_derivative(double s, double zeta) const;

  const std::vector<double>& homotopy_schedule() const { return schedule_; }
  const BlockadeInfo& blockade() const { return blockade_; }
  const SpeedProfile& speed_profile() const { return speed_; }
  double s_stop() const { return speed_.s_stop; }

  int steps() const { return static_cast<int>(bumps_.right.size()) - 1; }
  const BoundaryBumps& bumps() const { return bumps_; }
  double length() const { return path_->length(); }
  const PathSpline2D& path() const { return *path_; }
  std::shared_ptr<const PathSpline2D> path_ptr() const { return path_; }
  const BoundarySpline1D& base_right() const { return right_; }
  const BoundarySpline1D& base_left() const { return left_; }
  const EgoGeometry& ego() const { return ego_; }
  double road_speed() const { return road_speed_; }
  const ControlBounds& control_bounds() const { return bounds_; }
  double lateral_accel_limit() const { return an_limit_; }
  const CorridorConfig& config() const { return config_; }

 private:
  friend Corridor build_corridor(std::span<const ProtrusionSet>,
                                 std::shared_ptr<const PathSpline2D>, BoundarySpline1D,
                                 BoundarySpline1D, const EgoGeometry&, double,
                                 const ControlBounds&, double, int, const CorridorConfig&);

  std::shared_ptr<const PathSpline2D> path_;
  BoundarySpline1D right_;
  BoundarySpline1D left_;
  BoundaryBumps bumps_;
  std::vector<double> schedule_;
  EgoGeometry ego_;
  double road_speed_;
  ControlBounds bounds_;
  double an_limit_;
  CorridorConfig config_;
  BlockadeInfo blockade_;
  SpeedProfile speed_;
};

// Everything at one query point, for constraint assembly.
struct ConstraintEvaluation {
  double d_lo = 0.0;
  double d_hi = 0.0;
  double v_hi = 0.0;
  double s_stop = 0.0;
  double lateral_accel_limit = 0.0;
  ControlBounds bounds;
};
ConstraintEvaluation evaluate_corridor(const Corridor& corridor, double s, int k, double zeta);

// Turns per-step protrusions into boundary bumps: extract the in-lane face of
// each polygon, inflate it laterally by safety margin plus half the ego width
// and longitudinally by the body extents (a sliding-window sweep), merge
// proximate same-side contours through their convex chain, and keep what
// exceeds the base boundary. Every protrusion set must hold steps + 1 entries.
BoundaryBumps augment_boundaries(std::span<const ProtrusionSet> protrusions,
                                 const BoundarySpline1D& right, const BoundarySpline1D& left,
                                 const EgoGeometry& ego, int steps, const CorridorConfig& config);

// Scans the fully augmented corridor for sealed width: returns the smallest
// arc length over all steps where the width drops to omega_min, and the
// earliest step at which any sealing occurs.
BlockadeInfo detect_blockade(const Corridor& corridor);

// Walks backward from a blockade until the protruding boundary returns to the
// reference line, which is where a stop can wait without touching anything.
// Returns 0 when the boundary never comes back before the road start.
double anticipatory_stop(const Corridor& corridor, double s_h, int k_h);

// Speed bound that reaches standstill at s_stop using the braking limit, with
// a constant plateau before the deceleration onset.
SpeedProfile build_speed_profile(double s_stop, double road_speed, const ControlBounds& bounds);

// Assembles the corridor for one planning instant covering `steps` prediction
// intervals: augments the boundaries, detects blockades, places the
// anticipatory stop, and builds the speed bound.
Corridor build_corridor(std::span<const ProtrusionSet> protrusions,
                        std::shared_ptr<const PathSpline2D> path, BoundarySpline1D right,
                        BoundarySpline1D left, const EgoGeometry& ego, double road_speed,
                        const ControlBounds& bounds, double lateral_accel_limit, int steps,
                        const CorridorConfig& config = {});

}  // namespace planner
