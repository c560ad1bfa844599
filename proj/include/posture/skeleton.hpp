#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace posture {

using Point3 = Eigen::Vector3d;

// Kinect v2 body joints. The integer values are the frozen feature-layout order.
enum class JointId : std::uint8_t {
  SpineBase = 0,
  SpineMid,       // 1
  Neck,           // 2
  Head,           // 3
  ShoulderLeft,   // 4
  ElbowLeft,      // 5
  WristLeft,      // 6
  HandLeft,       // 7
  ShoulderRight,  // 8
  ElbowRight,     // 9
  WristRight,     // 10
  HandRight,      // 11
  HipLeft,        // 12
  KneeLeft,       // 13
  AnkleLeft,      // 14
  FootLeft,       // 15
  HipRight,       // 16
  KneeRight,      // 17
  AnkleRight,     // 18
  FootRight,      // 19
  SpineShoulder,  // 20
  HandTipLeft,    // 21
  ThumbLeft,      // 22
  HandTipRight,   // 23
  ThumbRight      // 24
};

inline constexpr std::size_t kJointCount = 25;

constexpr std::size_t index(JointId j) noexcept { return static_cast<std::size_t>(j); }
constexpr JointId joint_at(std::size_t i) noexcept { return static_cast<JointId>(i); }

std::string_view joint_name(JointId j) noexcept;
std::optional<JointId> joint_from_name(std::string_view name) noexcept;

// Posture classes; index order is the confusion-matrix layout.
enum class PostureLabel : std::uint8_t { Standing = 0, Bending, Sitting, Walking, Crouching };

inline constexpr std::size_t kLabelCount = 5;

constexpr std::size_t index(PostureLabel l) noexcept { return static_cast<std::size_t>(l); }
constexpr PostureLabel label_at(std::size_t i) noexcept { return static_cast<PostureLabel>(i); }

std::string_view label_name(PostureLabel l) noexcept;
std::optional<PostureLabel> label_from_name(std::string_view name) noexcept;

struct Bone {
  JointId parent;
  JointId child;
};

// Tree of 24 bones over the 25 joints, rooted at SpineBase.
class BoneTopology {
 public:
  static const BoneTopology& kinect_v2();

  std::span<const Bone> bones() const noexcept { return bones_; }
  // Neighbors of `j` in ascending joint index.
  const std::vector<JointId>& neighbors(JointId j) const noexcept { return adjacency_[index(j)]; }
  std::size_t degree(JointId j) const noexcept { return adjacency_[index(j)].size(); }

  // Canonical text form, used in feature fingerprints.
  std::string describe() const;

 private:
  explicit BoneTopology(std::vector<Bone> bones);

  std::vector<Bone> bones_;
  std::array<std::vector<JointId>, kJointCount> adjacency_;
};

// All unordered pairs of bone-tree neighbors of `j`, lower index first,
// lexicographically ordered.
std::vector<std::pair<JointId, JointId>> bone_pairs_at_joint(const BoneTopology& topology,
                                                             JointId j);

// 25 finite joint positions in meters, camera coordinates. Only constructible
// through validation, so every instance satisfies its invariants.
class Skeleton {
 public:
  using Positions = std::array<Point3, kJointCount>;

  // Throws NonFiniteCoordinate.
  static Skeleton from_positions(const Positions& positions);

  const Point3& operator[](JointId j) const noexcept { return positions_[index(j)]; }
  const Point3& at(std::size_t i) const noexcept { return positions_[i]; }
  const Positions& positions() const noexcept { return positions_; }

  // Applies `f` to every joint position and revalidates.
  Skeleton map(const std::function<Point3(const Point3&)>& f) const;

  bool operator==(const Skeleton& other) const noexcept;

 private:
  explicit Skeleton(const Positions& positions) : positions_(positions) {}
  Positions positions_;
};

using RawJointMap = std::map<std::string, std::array<double, 3>, std::less<>>;

// Throws MissingJoint(name), UnknownJoint(name), NonFiniteCoordinate(joint, axis).
Skeleton validate_skeleton(const RawJointMap& raw);

struct ObservationMeta {
  std::string participant_id;
  double orientation_deg = 0.0;
  double distance_m = 1.0;
};

struct Observation {
  Skeleton skeleton;
  std::optional<PostureLabel> label;
  ObservationMeta meta;
};

}  // namespace posture
