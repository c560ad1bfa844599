#include "posture/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "posture/error.hpp"

namespace posture {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "SpineBase",     "SpineMid",     "Neck",       "Head",         "ShoulderLeft",
    "ElbowLeft",     "WristLeft",    "HandLeft",   "ShoulderRight", "ElbowRight",
    "WristRight",    "HandRight",    "HipLeft",    "KneeLeft",     "AnkleLeft",
    "FootLeft",      "HipRight",     "KneeRight",  "AnkleRight",   "FootRight",
    "SpineShoulder", "HandTipLeft",  "ThumbLeft",  "HandTipRight", "ThumbRight",
};

constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "Standing", "Bending", "Sitting", "Walking", "Crouching",
};

constexpr std::array<char, 3> kAxes = {'x', 'y', 'z'};

std::vector<Bone> kinect_bones() {
  using J = JointId;
  return {
      {J::SpineBase, J::SpineMid},          {J::SpineMid, J::SpineShoulder},
      {J::SpineShoulder, J::Neck},          {J::Neck, J::Head},
      {J::SpineShoulder, J::ShoulderLeft},  {J::ShoulderLeft, J::ElbowLeft},
      {J::ElbowLeft, J::WristLeft},         {J::WristLeft, J::HandLeft},
      {J::HandLeft, J::HandTipLeft},        {J::WristLeft, J::ThumbLeft},
      {J::SpineShoulder, J::ShoulderRight}, {J::ShoulderRight, J::ElbowRight},
      {J::ElbowRight, J::WristRight},       {J::WristRight, J::HandRight},
      {J::HandRight, J::HandTipRight},      {J::WristRight, J::ThumbRight},
      {J::SpineBase, J::HipLeft},           {J::HipLeft, J::KneeLeft},
      {J::KneeLeft, J::AnkleLeft},          {J::AnkleLeft, J::FootLeft},
      {J::SpineBase, J::HipRight},          {J::HipRight, J::KneeRight},
      {J::KneeRight, J::AnkleRight},        {J::AnkleRight, J::FootRight},
  };
}

}  // namespace

std::string_view joint_name(JointId j) noexcept { return kJointNames[index(j)]; }

std::optional<JointId> joint_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return joint_at(i);
  }
  return std::nullopt;
}

std::string_view label_name(PostureLabel l) noexcept { return kLabelNames[index(l)]; }

std::optional<PostureLabel> label_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelNames[i] == name) return label_at(i);
  }
  return std::nullopt;
}

BoneTopology::BoneTopology(std::vector<Bone> bones) : bones_(std::move(bones)) {
  for (const Bone& b : bones_) {
    adjacency_[index(b.parent)].push_back(b.child);
    adjacency_[index(b.child)].push_back(b.parent);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(),
              [](JointId a, JointId b) { return index(a) < index(b); });
  }
}

const BoneTopology& BoneTopology::kinect_v2() {
  static const BoneTopology topology(kinect_bones());
  return topology;
}

std::string BoneTopology::describe() const {
  std::string out;
  for (const Bone& b : bones_) {
    out += std::to_string(index(b.parent));
    out += '-';
    out += std::to_string(index(b.child));
    out += ';';
  }
  return out;
}

std::vector<std::pair<JointId, JointId>> bone_pairs_at_joint(const BoneTopology& topology,
                                                             JointId j) {
  const auto& nb = topology.neighbors(j);
  std::vector<std::pair<JointId, JointId>> pairs;
  for (std::size_t a = 0; a < nb.size(); ++a) {
    for (std::size_t b = a + 1; b < nb.size(); ++b) pairs.emplace_back(nb[a], nb[b]);
  }
  return pairs;
}

Skeleton Skeleton::from_positions(const Positions& positions) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    for (int axis = 0; axis < 3; ++axis) {
      if (!std::isfinite(positions[i][axis])) {
        throw Error(ErrorCode::NonFiniteCoordinate, std::string(kJointNames[i]),
                    std::string(1, kAxes[static_cast<std::size_t>(axis)]));
      }
    }
  }
  return Skeleton(positions);
}

Skeleton Skeleton::map(const std::function<Point3(const Point3&)>& f) const {
  Positions out;
  for (std::size_t i = 0; i < kJointCount; ++i) out[i] = f(positions_[i]);
  return from_positions(out);
}

bool Skeleton::operator==(const Skeleton& other) const noexcept {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (positions_[i] != other.positions_[i]) return false;
  }
  return true;
}

Skeleton validate_skeleton(const RawJointMap& raw) {
  for (const auto& [name, xyz] : raw) {
    if (!joint_from_name(name)) throw Error(ErrorCode::UnknownJoint, name);
  }
  Skeleton::Positions positions;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    auto it = raw.find(kJointNames[i]);
    if (it == raw.end()) throw Error(ErrorCode::MissingJoint, std::string(kJointNames[i]));
    positions[i] = Point3(it->second[0], it->second[1], it->second[2]);
  }
  return Skeleton::from_positions(positions);
}

}  // namespace posture
