#include "posture/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "posture/error.hpp"
#include "posture/util.hpp"

namespace posture {

namespace {

// Segment lengths in meters for a ~1.75 m adult.
constexpr double kLowerSpine = 0.26;
constexpr double kUpperSpine = 0.24;
constexpr double kNeck = 0.08;
constexpr double kHead = 0.14;
constexpr double kShoulderHalfWidth = 0.18;
constexpr double kShoulderDrop = 0.04;
constexpr double kHipHalfWidth = 0.09;
constexpr double kHipDrop = 0.06;
constexpr double kUpperArm = 0.29;
constexpr double kForearm = 0.25;
constexpr double kPalm = 0.08;
constexpr double kFingers = 0.07;
constexpr double kThumbAlong = 0.04;
constexpr double kThumbOut = 0.03;
constexpr double kThigh = 0.43;
constexpr double kShank = 0.42;
constexpr double kFoot = 0.14;

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Unit vector hanging straight down, swung forward by `flex_deg` in the
// sagittal plane and then out to `side` (+1 left, −1 right) by `abd_deg`.
Point3 limb_dir(double flex_deg, double abd_deg, double side) {
  const double f = rad(flex_deg), a = rad(abd_deg);
  return {side * std::sin(a), -std::cos(a) * std::cos(f), std::cos(a) * std::sin(f)};
}

// Trunk axis pitched forward by `pitch_deg` from vertical.
Point3 up_dir(double pitch_deg) {
  const double p = rad(pitch_deg);
  return {0.0, std::cos(p), std::sin(p)};
}

// All angles in degrees, measured in the world frame.
struct Limb {
  double flex = 0.0;   // proximal segment swing forward from hanging
  double abd = 0.0;    // sideways spread
  double bend = 0.0;   // distal segment flexion relative to the proximal one
};

struct PoseParams {
  double trunk_pitch = 0.0;
  double head_pitch = 0.0;
  Limb arm_left, arm_right;
  Limb leg_left, leg_right;
};

PoseParams params_for(PostureLabel label) {
  PoseParams p;
  switch (label) {
    case PostureLabel::Standing:
      p.arm_left = {4.0, 8.0, 8.0};
      p.arm_right = {4.0, 8.0, 8.0};
      p.leg_left = {0.0, 3.0, 0.0};
      p.leg_right = {0.0, 3.0, 0.0};
      break;
    case PostureLabel::Bending:
      p.trunk_pitch = 80.0;
      p.head_pitch = 10.0;
      p.arm_left = {10.0, 5.0, 10.0};
      p.arm_right = {10.0, 5.0, 10.0};
      p.leg_left = {-5.0, 3.0, 0.0};
      p.leg_right = {-5.0, 3.0, 0.0};
      break;
    case PostureLabel::Sitting:
      p.trunk_pitch = -5.0;
      p.arm_left = {20.0, 10.0, 60.0};
      p.arm_right = {20.0, 10.0, 60.0};
      p.leg_left = {90.0, 6.0, 90.0};
      p.leg_right = {90.0, 6.0, 90.0};
      break;
    case PostureLabel::Walking:
      p.trunk_pitch = 4.0;
      p.arm_left = {-20.0, 6.0, 15.0};
      p.arm_right = {25.0, 6.0, 25.0};
      p.leg_left = {25.0, 2.0, 5.0};
      p.leg_right = {-15.0, 2.0, 20.0};
      break;
    case PostureLabel::Crouching:
      p.trunk_pitch = 40.0;
      p.head_pitch = -20.0;
      p.arm_left = {40.0, 12.0, 30.0};
      p.arm_right = {40.0, 12.0, 30.0};
      // Thigh 80° forward with 120° knee flexion: hip and knee both near 120°.
      p.leg_left = {80.0, 10.0, 120.0};
      p.leg_right = {80.0, 10.0, 120.0};
      break;
  }
  return p;
}

Skeleton build_pose(const PoseParams& p) {
  using J = JointId;
  Skeleton::Positions pos;
  auto at = [&pos](J j) -> Point3& { return pos[index(j)]; };

  const Point3 up = up_dir(p.trunk_pitch);
  const Point3 head_up = up_dir(p.trunk_pitch + p.head_pitch);
  const Point3 lateral(1.0, 0.0, 0.0);

  at(J::SpineBase) = Point3::Zero();
  at(J::SpineMid) = at(J::SpineBase) + kLowerSpine * up;
  at(J::SpineShoulder) = at(J::SpineMid) + kUpperSpine * up;
  at(J::Neck) = at(J::SpineShoulder) + kNeck * head_up;
  at(J::Head) = at(J::Neck) + kHead * head_up;

  auto build_arm = [&](const Limb& limb, double side, J shoulder, J elbow, J wrist, J hand,
                       J tip, J thumb) {
    at(shoulder) = at(J::SpineShoulder) + side * kShoulderHalfWidth * lateral - kShoulderDrop * up;
    const Point3 upper = limb_dir(limb.flex, limb.abd, side);
    const Point3 fore = limb_dir(limb.flex + limb.bend, limb.abd, side);
    const Point3 across = limb_dir(limb.flex + limb.bend + 90.0, 0.0, side);
    at(elbow) = at(shoulder) + kUpperArm * upper;
    at(wrist) = at(elbow) + kForearm * fore;
    at(hand) = at(wrist) + kPalm * fore;
    at(tip) = at(hand) + kFingers * fore;
    at(thumb) = at(wrist) + kThumbAlong * fore + kThumbOut * across;
  };
  build_arm(p.arm_left, 1.0, J::ShoulderLeft, J::ElbowLeft, J::WristLeft, J::HandLeft,
            J::HandTipLeft, J::ThumbLeft);
  build_arm(p.arm_right, -1.0, J::ShoulderRight, J::ElbowRight, J::WristRight, J::HandRight,
            J::HandTipRight, J::ThumbRight);

  auto build_leg = [&](const Limb& limb, double side, J hip, J knee, J ankle, J foot) {
    at(hip) = at(J::SpineBase) + side * kHipHalfWidth * lateral - kHipDrop * up;
    const double shank_flex = limb.flex - limb.bend;
    at(knee) = at(hip) + kThigh * limb_dir(limb.flex, limb.abd, side);
    at(ankle) = at(knee) + kShank * limb_dir(shank_flex, limb.abd, side);
    at(foot) = at(ankle) + kFoot * limb_dir(shank_flex + 90.0, 0.0, side);
  };
  build_leg(p.leg_left, 1.0, J::HipLeft, J::KneeLeft, J::AnkleLeft, J::FootLeft);
  build_leg(p.leg_right, -1.0, J::HipRight, J::KneeRight, J::AnkleRight, J::FootRight);

  return Skeleton::from_positions(pos);
}

}  // namespace

void SynthSpec::validate() const {
  auto fail = [](const char* field, const char* why) {
    throw Error(ErrorCode::InvalidConfig, field, {}, std::nullopt, why);
  };
  if (per_class == 0) fail("per_class", "must be > 0");
  if (participants == 0) fail("participants", "must be > 0");
  if (!(noise_stddev_m >= 0.0) || !std::isfinite(noise_stddev_m)) fail("noise", "must be >= 0");
  if (!(scale_min > 0.0) || !(scale_max >= scale_min) || !std::isfinite(scale_max)) {
    fail("scale", "need 0 < min <= max");
  }
  if (orientations_deg.empty()) fail("orientations", "must not be empty");
  for (double o : orientations_deg) {
    if (!(o >= 0.0 && o < 360.0)) fail("orientations", "must be in [0, 360)");
  }
  if (distances_m.empty()) fail("distances", "must not be empty");
  for (double d : distances_m) {
    if (!(d > 0.0) || !std::isfinite(d)) fail("distances", "must be > 0");
  }
}

std::string SynthSpec::describe() const {
  nlohmann::ordered_json j;
  j["generator"] = "synth";
  j["seed"] = seed;
  j["per_class"] = per_class;
  j["participants"] = participants;
  j["orientations_deg"] = orientations_deg;
  j["distances_m"] = distances_m;
  j["noise_stddev_m"] = noise_stddev_m;
  j["scale_min"] = scale_min;
  j["scale_max"] = scale_max;
  return j.dump();
}

Skeleton pose_template(PostureLabel label) { return build_pose(params_for(label)); }

LabeledDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  LabeledDataset ds;
  ds.provenance = spec.describe();

  // Stream 0 fixes the participants; record r uses stream r + 1.
  Rng participant_rng = Rng::derive(spec.seed, 0);
  std::vector<double> scales(spec.participants);
  for (double& s : scales) s = participant_rng.uniform(spec.scale_min, spec.scale_max);

  const std::size_t n_orient = spec.orientations_deg.size();
  std::uint64_t record = 0;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    const PostureLabel label = label_at(k);
    const Skeleton base = pose_template(label);
    for (std::size_t i = 0; i < spec.per_class; ++i, ++record) {
      Rng rng = Rng::derive(spec.seed, record + 1);
      const std::size_t participant = i % spec.participants;
      const std::size_t condition = i / spec.participants;
      const double orientation = spec.orientations_deg[condition % n_orient];
      const double distance = spec.distances_m[(condition / n_orient) % spec.distances_m.size()];
      const double scale = scales[participant];

      // Vertical-axis rotation; the body faces the camera (−z) at orientation 0.
      const double theta = rad(orientation + 180.0);
      const double c = std::cos(theta), s = std::sin(theta);
      Skeleton::Positions pos;
      for (std::size_t j = 0; j < kJointCount; ++j) {
        const Point3 b = scale * base.at(j);
        pos[j] = Point3(c * b.x() + s * b.z(), b.y(), -s * b.x() + c * b.z() + distance);
        if (spec.noise_stddev_m > 0.0) {
          for (int a = 0; a < 3; ++a) pos[j][a] += spec.noise_stddev_m * rng.normal();
        }
      }

      char participant_id[32];
      std::snprintf(participant_id, sizeof(participant_id), "P%02zu", participant + 1);
      ds.records.push_back(Observation{Skeleton::from_positions(pos), label,
                                       ObservationMeta{participant_id, orientation, distance}});
    }
  }
  return ds;
}

}  // namespace posture
