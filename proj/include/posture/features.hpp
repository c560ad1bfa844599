#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "posture/skeleton.hpp"

namespace posture {

inline constexpr std::size_t kDistanceCount = kJointCount * (kJointCount - 1) / 2;  // 300
inline constexpr std::size_t kAdjacentAngleCount = 29;
inline constexpr std::size_t kAllTriplesAngleCount =
    kJointCount * (kJointCount - 1) * (kJointCount - 2) / 6;  // 2300

// Below this the spine segment is treated as a data error.
inline constexpr double kMinNormalizer = 1e-6;
// Segments shorter than this make an angle undefined.
inline constexpr double kMinSegment = 1e-9;

enum class AngleMode { AdjacentSegments, AllTriples };

struct FeatureConfig {
  bool use_distances = true;
  bool use_angles = true;
  AngleMode angle_mode = AngleMode::AdjacentSegments;

  // `features` is distances|angles|combined; `angle_mode` is adjacent|all_triples.
  static FeatureConfig parse(std::string_view features, std::string_view angle_mode);

  // Throws InvalidConfig when both families are disabled.
  void validate() const;
  std::size_t dimension() const;
  std::string features_name() const;
  std::string angle_mode_name() const;
  // Stable hash of the config, the joint order and the bone topology.
  std::string fingerprint() const;

  bool operator==(const FeatureConfig&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  std::string config_fingerprint;
  std::size_t degenerate_angles = 0;
};

// ‖SpineShoulder − SpineMid‖; throws DegenerateNormalizer below kMinNormalizer.
double normalizer(const Skeleton& s);

// Normalized distances for all joint pairs (i < j), lexicographic in (i, j).
std::vector<double> pairwise_distances(const Skeleton& s);

// Angle at `vertex` between the rays towards `a` and `c`, in [0, π].
// Throws ZeroLengthSegment if either ray is shorter than kMinSegment.
double joint_angle(const Point3& a, const Point3& vertex, const Point3& c);

struct AngleFeatures {
  std::vector<double> values;
  std::size_t degenerate_count = 0;
};

// Degenerate entries are emitted as 0 and counted rather than thrown.
AngleFeatures angle_features(const Skeleton& s, AngleMode mode);

FeatureVector extract(const Skeleton& s, const FeatureConfig& cfg);

}  // namespace posture
