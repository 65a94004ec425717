#pragma once
/**
 * @file   sensing.hpp
 * @brief  Synthetic target/human detections and the binary context features.
 *
 * Image-plane bounding boxes are replaced by sensor-centred footprints: an
 * interval of bearings (relative to a reference bearing) times an interval of
 * ranges. The overlap ratio and the depth-drop rule operate on these.
 */

#include "ctxtrack/random.hpp"
#include "ctxtrack/world.hpp"

#include <deque>
#include <optional>
#include <vector>

namespace ctxtrack {

struct SensorParams {
  double p_d = 0.9;
  double p_e = 0.05;
  Mat2 cov = Mat2::Identity() * 0.05 * 0.05;
  double depth_window = 1.0;     ///< seconds of range history averaged by the depth feature
  double overlap_threshold = 0.5;
  double depth_threshold = 0.3;  ///< metres
  double p_d_human = 0.95;
  double target_radius = 0.1;    ///< physical extent used for footprints and range hits

  void validate() const;
};

enum class DetectionSource { None, Target, Clutter };

/// Either EMPTY or a planar position measurement.
struct Detection {
  std::optional<Vec2> value;
  /// Ground truth about which branch produced the detection; never read by the agent.
  DetectionSource source = DetectionSource::None;

  bool empty() const { return !value.has_value(); }
  static Detection none() { return {}; }
  static Detection at(const Vec2& p, DetectionSource src = DetectionSource::Target) { return {p, src}; }
};

struct HumanSighting {
  int id = 0;
  Vec2 position = Vec2::Zero();
};

struct FeatureVector {
  bool target = false;
  bool overlap = false;
  bool depth = false;
  bool human = false;

  /// Bit-packed observation symbol in [0, 16): target | overlap<<1 | depth<<2 | human<<3.
  int symbol() const { return int(target) | int(overlap) << 1 | int(depth) << 2 | int(human) << 3; }
  static FeatureVector from_symbol(int s) { return {(s & 1) != 0, (s & 2) != 0, (s & 4) != 0, (s & 8) != 0}; }
  bool operator==(const FeatureVector&) const = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Bearing interval (relative to a reference bearing) times range interval.
struct Footprint {
  Interval bearing;
  Interval range;
  double area() const { return bearing.length() * range.length(); }
};

/// area(bb_i ∩ bb_j) / area(bb_i). Throws std::invalid_argument if bb_i has zero area.
double overlap_ratio(const Footprint& bb_i, const Footprint& bb_j);

/// Footprint of a disc of `radius` around `p`, bearings relative to `reference`.
Footprint disc_footprint(const Vec2& origin, const Vec2& p, double radius, double reference);

/// Shadow footprint of an occluder: its bearing span times [nearest range, max_range],
/// clipped to the sector bearing window [-half_fov, half_fov] around `sensor_offset`.
/// Empty when the occluder is outside the window or beyond max_range.
std::optional<Footprint> occluder_footprint(const Vec2& origin, const Segment& s, double reference,
                                            double sensor_offset, double half_fov, double max_range);

/// Range samples taken along the target's last known bearing.
class RangeHistory {
 public:
  void record(double time, double range);
  /// True if samples reach back at least `window` seconds before `now`.
  bool covers(double now, double window) const;
  /// Mean of samples with time in [now - window, now); NaN when none.
  double mean(double now, double window) const;
  void clear() { samples_.clear(); }
  std::size_t size() const { return samples_.size(); }

 private:
  struct Sample {
    double time;
    double range;
  };
  std::deque<Sample> samples_;
  double horizon_ = 5.0;
};

/// Four-branch detection generator.
Detection detect_target(const WorldState& world, const RobotConfig& q, const FovParams& f,
                        const SensorParams& params, Rng& rng);

/// Each human in the effective FOV is seen with probability p_d_human.
std::vector<HumanSighting> detect_humans(const WorldState& world, const RobotConfig& q, const FovParams& f,
                                         const SensorParams& params, Rng& rng);

/// Uniform draw over the effective FOV (clutter). Falls back to the plain sector after
/// `max_attempts` rejected draws.
Vec2 sample_effective_fov(const WorldState& world, const RobotConfig& q, const FovParams& f, Rng& rng,
                          int max_attempts = 64);

/// Intermediate values behind the feature vector, also consumed as context cues.
struct FeatureAnalysis {
  FeatureVector features;
  double overlap = 0.0;
  std::optional<int> occluder_id;
  /// Point where the sight line to the last target position meets the occluder.
  std::optional<Vec2> occluder_point;
  std::optional<double> current_range;  ///< range along the last target bearing, if in view
  std::optional<double> depth_drop;
};

FeatureAnalysis analyze_features(const WorldState& world, const RobotConfig& q, const FovParams& f,
                                 const Detection& z, const std::vector<HumanSighting>& humans,
                                 const RangeHistory& history, const std::optional<Vec2>& last_target,
                                 const SensorParams& params);

FeatureVector extract_features(const WorldState& world, const RobotConfig& q, const FovParams& f,
                               const Detection& z, const std::vector<HumanSighting>& humans,
                               const RangeHistory& history, const std::optional<Vec2>& last_target,
                               const SensorParams& params);

}  // namespace ctxtrack
