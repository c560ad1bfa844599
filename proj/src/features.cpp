#include "posture/features.hpp"

#include <cmath>

#include "posture/error.hpp"
#include "posture/util.hpp"

namespace posture {

FeatureConfig FeatureConfig::parse(std::string_view features, std::string_view angle_mode) {
  FeatureConfig cfg;
  if (features == "distances") {
    cfg.use_angles = false;
  } else if (features == "angles") {
    cfg.use_distances = false;
  } else if (features != "combined") {
    throw Error(ErrorCode::InvalidConfig, "features", std::string(features),
                std::nullopt, "expected distances|angles|combined");
  }
  if (angle_mode == "all_triples") {
    cfg.angle_mode = AngleMode::AllTriples;
  } else if (angle_mode != "adjacent") {
    throw Error(ErrorCode::InvalidConfig, "angle_mode", std::string(angle_mode),
                std::nullopt, "expected adjacent|all_triples");
  }
  return cfg;
}

void FeatureConfig::validate() const {
  if (!use_distances && !use_angles) {
    throw Error(ErrorCode::InvalidConfig, "features", {}, std::nullopt,
                "at least one feature family must be enabled");
  }
}

std::size_t FeatureConfig::dimension() const {
  std::size_t n = 0;
  if (use_distances) n += kDistanceCount;
  if (use_angles) {
    n += angle_mode == AngleMode::AdjacentSegments ? kAdjacentAngleCount : kAllTriplesAngleCount;
  }
  return n;
}

std::string FeatureConfig::features_name() const {
  if (use_distances && use_angles) return "combined";
  return use_distances ? "distances" : "angles";
}

std::string FeatureConfig::angle_mode_name() const {
  return angle_mode == AngleMode::AdjacentSegments ? "adjacent" : "all_triples";
}

std::string FeatureConfig::fingerprint() const {
  Fnv1a h;
  h.update("distances=").update(use_distances ? "1" : "0");
  h.update(";angles=").update(use_angles ? "1" : "0");
  h.update(";mode=").update(angle_mode_name());
  h.update(";joints=");
  for (std::size_t i = 0; i < kJointCount; ++i) h.update(joint_name(joint_at(i))).update(",");
  h.update(";bones=").update(BoneTopology::kinect_v2().describe());
  return h.hex();
}

double normalizer(const Skeleton& s) {
  const double len = (s[JointId::SpineShoulder] - s[JointId::SpineMid]).norm();
  if (!(len >= kMinNormalizer)) {
    throw Error(ErrorCode::DegenerateNormalizer, "SpineShoulder-SpineMid", {}, std::nullopt,
                "spine segment length " + format_double(len) + " m");
  }
  return len;
}

std::vector<double> pairwise_distances(const Skeleton& s) {
  const double scale = normalizer(s);
  std::vector<double> out;
  out.reserve(kDistanceCount);
  for (std::size_t i = 0; i < kJointCount; ++i) {
    for (std::size_t j = i + 1; j < kJointCount; ++j) {
      out.push_back((s.at(i) - s.at(j)).norm() / scale);
    }
  }
  return out;
}

double joint_angle(const Point3& a, const Point3& vertex, const Point3& c) {
  const Point3 u = a - vertex;
  const Point3 v = c - vertex;
  if (!(u.norm() > kMinSegment) || !(v.norm() > kMinSegment)) {
    throw Error(ErrorCode::ZeroLengthSegment);
  }
  // atan2 form of arccos(u·v / |u||v|): same angle, no precision loss near 0 and π.
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

AngleFeatures angle_features(const Skeleton& s, AngleMode mode) {
  AngleFeatures out;
  auto emit = [&](const Point3& a, const Point3& vertex, const Point3& c) {
    const Point3 u = a - vertex;
    const Point3 v = c - vertex;
    if (!(u.norm() > kMinSegment) || !(v.norm() > kMinSegment)) {
      out.values.push_back(0.0);
      ++out.degenerate_count;
      return;
    }
    out.values.push_back(std::atan2(u.cross(v).norm(), u.dot(v)));
  };

  if (mode == AngleMode::AdjacentSegments) {
    const auto& topology = BoneTopology::kinect_v2();
    out.values.reserve(kAdjacentAngleCount);
    for (std::size_t j = 0; j < kJointCount; ++j) {
      for (const auto& [first, second] : bone_pairs_at_joint(topology, joint_at(j))) {
        emit(s[first], s.at(j), s[second]);
      }
    }
  } else {
    out.values.reserve(kAllTriplesAngleCount);
    for (std::size_t i = 0; i < kJointCount; ++i) {
      for (std::size_t j = i + 1; j < kJointCount; ++j) {
        for (std::size_t k = j + 1; k < kJointCount; ++k) emit(s.at(i), s.at(j), s.at(k));
      }
    }
  }
  return out;
}

FeatureVector extract(const Skeleton& s, const FeatureConfig& cfg) {
  cfg.validate();
  FeatureVector fv;
  fv.values.reserve(cfg.dimension());
  if (cfg.use_distances) fv.values = pairwise_distances(s);
  if (cfg.use_angles) {
    AngleFeatures angles = angle_features(s, cfg.angle_mode);
    fv.values.insert(fv.values.end(), angles.values.begin(), angles.values.end());
    fv.degenerate_angles = angles.degenerate_count;
  }
  fv.config_fingerprint = cfg.fingerprint();
  return fv;
}

}  // namespace posture
