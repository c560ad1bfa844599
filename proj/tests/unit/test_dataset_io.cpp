#include <doctest.h>

#include <array>
#include <cmath>
#include <set>
#include <fstream>
#include <numbers>
#include <sstream>

#include "posture/dataset.hpp"
#include "posture/evaluation.hpp"
#include "posture/model_io.hpp"
#include "posture/synth.hpp"
#include "support.hpp"

using namespace posture;
using testsupport::error_code_of;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

std::string header(std::size_t records) {
  return "{\"format\":\"posture-skeletons\",\"version\":1,\"joint_order\":\"" + joint_order_checksum() +
         "\",\"records\":" + std::to_string(records) + "}\n";
}

std::string record(const std::string& participant, const std::string& label,
                   const std::string& skip_joint = "", const std::string& head_z = "0.5") {
  std::string joints;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const std::string name(joint_name(joint_at(i)));
    if (name == skip_joint) continue;
    if (!joints.empty()) joints += ",";
    const std::string z = name == "Head" ? head_z : "2.5";
    joints += "\"" + name + "\":[" + std::to_string(0.01 * i) + "," + std::to_string(0.05 * i) + "," + z + "]";
  }
  std::string out = "{\"participant\":\"" + participant + "\"";
  if (!label.empty()) out += ",\"label\":\"" + label + "\"";
  return out + ",\"orientation_deg\":90,\"distance_m\":2.5,\"joints\":{" + joints + "}}\n";
}

LabeledDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in);
}

Error parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e;
  }
  throw std::runtime_error("expected a parse error");
}

double trunk_pitch_deg(const Skeleton& s) {
  const Point3 trunk = s[JointId::SpineShoulder] - s[JointId::SpineBase];
  return std::acos(trunk.normalized().y()) * kDeg;
}

double interior_deg(const Skeleton& s, JointId a, JointId b, JointId c) {
  return joint_angle(s[a], s[b], s[c]) * kDeg;
}

const LabeledDataset& small_synth() {
  static const LabeledDataset ds = [] {
    SynthSpec s;
    s.per_class = 30;
    return synth_generate(s);
  }();
  return ds;
}

}  // namespace

TEST_CASE("three well-formed records load in order") {
  const auto ds = parse(header(3) + record("A", "Standing") + record("B", "Walking") + record("C", ""));
  REQUIRE(ds.size() == 3);
  CHECK(ds.records[0].meta.participant_id == "A");
  CHECK(ds.records[1].label == PostureLabel::Walking);
  CHECK_FALSE(ds.records[2].label.has_value());
  CHECK(ds.records[0].meta.orientation_deg == 90.0);
  CHECK(ds.records[0].meta.distance_m == 2.5);
  CHECK(ds.records[0].skeleton[JointId::Head] == Point3(0.03, 0.15, 0.5));
}

TEST_CASE("load errors carry line numbers") {
  auto e = parse_error(header(2) + record("A", "Standing") + record("B", "Jumping"));
  CHECK(e.code() == ErrorCode::UnknownLabel);
  CHECK(e.line() == 3);
  CHECK(e.subject() == "Jumping");

  e = parse_error(header(2) + record("A", "Standing", "ThumbLeft") + record("B", "Standing"));
  CHECK(e.code() == ErrorCode::MissingJoint);
  CHECK(e.line() == 2);
  CHECK(e.subject() == "ThumbLeft");

  e = parse_error(header(1) + record("A", "Sitting", "", "null"));
  CHECK(e.code() == ErrorCode::NonFiniteCoordinate);
  CHECK(e.line() == 2);
  CHECK(e.subject() == "Head");
  CHECK(e.qualifier() == "z");

  e = parse_error(header(2) + record("A", "Sitting") + "{\"participant\": oops}\n");
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(e.line() == 3);
  CHECK(std::string(e.what()).find("line 3") != std::string::npos);

  e = parse_error(header(3) + record("A", "Sitting") + record("B", "Sitting"));
  CHECK(e.code() == ErrorCode::ParseError);

  e = parse_error(record("A", "Sitting"));
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(e.line() == 1);

  std::string v0 = header(0);
  v0.replace(v0.find("\"version\":1"), 11, "\"version\":0");
  CHECK(parse_error(v0).code() == ErrorCode::VersionMismatch);

  CHECK(error_code_of([] { load_dataset("/nonexistent/posture.jsonl"); }) == ErrorCode::IoError);
}

TEST_CASE("record metadata is range checked") {
  std::string rec = record("A", "Standing");
  rec.replace(rec.find("\"orientation_deg\":90"), 20, "\"orientation_deg\":360");
  CHECK(parse_error(header(1) + rec).code() == ErrorCode::ParseError);
  rec = record("A", "Standing");
  rec.replace(rec.find("\"distance_m\":2.5"), 16, "\"distance_m\":0");
  CHECK(parse_error(header(1) + rec).code() == ErrorCode::ParseError);
}

TEST_CASE("serialization round-trips bit-exactly") {
  const auto& ds = small_synth();
  const std::string text = serialize_dataset(ds);
  const auto back = parse(text);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].skeleton == ds.records[i].skeleton);
    CHECK(back.records[i].label == ds.records[i].label);
    CHECK(back.records[i].meta.participant_id == ds.records[i].meta.participant_id);
  }
  CHECK(back.provenance == ds.provenance);
  CHECK(serialize_dataset(back) == text);
  CHECK(back.fingerprint() == ds.fingerprint());

  testsupport::TempDir dir;
  save_dataset(ds, dir / "ds.jsonl");
  CHECK(load_dataset(dir / "ds.jsonl").fingerprint() == ds.fingerprint());
}

TEST_CASE("fingerprint follows record bytes") {
  auto ds = small_synth();
  const auto base = ds.fingerprint();
  auto pos = ds.records[7].skeleton.positions();
  pos[3].x() = std::nextafter(pos[3].x(), 1e9);
  ds.records[7].skeleton = Skeleton::from_positions(pos);
  CHECK(ds.fingerprint() != base);

  auto relabeled = small_synth();
  relabeled.records[0].label = PostureLabel::Crouching;
  CHECK(relabeled.fingerprint() != base);

  auto same = small_synth();
  same.provenance = "something else";
  CHECK(same.fingerprint() == base);
}

TEST_CASE("synthetic generator contract") {
  SynthSpec spec;
  const auto ds = synth_generate(spec);
  REQUIRE(ds.size() == 1040);
  std::array<std::size_t, kLabelCount> per{};
  std::set<std::string> participants;
  std::set<double> orientations, distances;
  for (const auto& r : ds.records) {
    ++per[index(*r.label)];
    participants.insert(r.meta.participant_id);
    orientations.insert(r.meta.orientation_deg);
    distances.insert(r.meta.distance_m);
  }
  for (auto n : per) CHECK(n == 208);
  CHECK(participants.size() == 13);
  CHECK(orientations == std::set<double>{0, 90, 180, 270});
  CHECK(distances == std::set<double>{1, 2, 3, 4});
  // records are placed at their nominal camera distance
  for (const auto& r : ds.records) {
    CHECK(std::abs(r.skeleton[JointId::SpineBase].z() - r.meta.distance_m) < 0.2);
  }
}

TEST_CASE("synthetic generation is seed-deterministic") {
  SynthSpec a;
  a.per_class = 20;
  CHECK(serialize_dataset(synth_generate(a)) == serialize_dataset(synth_generate(a)));
  SynthSpec b = a;
  b.seed = 43;
  CHECK(synth_generate(a).fingerprint() != synth_generate(b).fingerprint());
}

TEST_CASE("noiseless fixed-pose synthesis gives identical features per class") {
  SynthSpec spec;
  spec.per_class = 12;
  spec.noise_stddev_m = 0;
  spec.scale_min = spec.scale_max = 1;
  spec.orientations_deg = {0};
  spec.distances_m = {2};
  const auto ds = synth_generate(spec);
  const FeatureConfig cfg;
  for (std::size_t i = 1; i < ds.size(); ++i) {
    if (ds.records[i].label != ds.records[i - 1].label) continue;
    CHECK(extract(ds.records[i].skeleton, cfg).values == extract(ds.records[i - 1].skeleton, cfg).values);
  }
}

TEST_CASE("noiseless synthesis is invariant across orientation, distance and scale") {
  SynthSpec spec;
  spec.per_class = 32;
  spec.noise_stddev_m = 0;
  const auto ds = synth_generate(spec);
  const FeatureConfig cfg{true, true, AngleMode::AllTriples};
  std::array<std::vector<double>, kLabelCount> first;
  for (const auto& r : ds.records) {
    const auto v = extract(r.skeleton, cfg).values;
    auto& ref = first[index(*r.label)];
    if (ref.empty()) {
      ref = v;
      continue;
    }
    double worst = 0;
    for (std::size_t k = 0; k < v.size(); ++k) worst = std::max(worst, std::abs(v[k] - ref[k]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("synth spec validation") {
  auto bad = [](auto mutate) {
    SynthSpec s;
    mutate(s);
    return error_code_of([&] { s.validate(); });
  };
  CHECK(bad([](SynthSpec& s) { s.per_class = 0; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](SynthSpec& s) { s.noise_stddev_m = -0.1; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](SynthSpec& s) { s.scale_min = 0; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](SynthSpec& s) { s.scale_max = 0.5; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](SynthSpec& s) { s.orientations_deg = {400}; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](SynthSpec& s) { s.distances_m = {}; }) == ErrorCode::InvalidConfig);
}

TEST_CASE("pose templates have the described geometry") {
  using J = JointId;
  const auto standing = pose_template(PostureLabel::Standing);
  const auto bending = pose_template(PostureLabel::Bending);
  const auto sitting = pose_template(PostureLabel::Sitting);
  const auto walking = pose_template(PostureLabel::Walking);
  const auto crouching = pose_template(PostureLabel::Crouching);

  CHECK(trunk_pitch_deg(standing) < 1.0);
  CHECK(interior_deg(standing, J::HipLeft, J::KneeLeft, J::AnkleLeft) > 175.0);
  CHECK(std::abs(trunk_pitch_deg(bending) - 80.0) < 5.0);

  CHECK(std::abs(interior_deg(sitting, J::HipLeft, J::KneeLeft, J::AnkleLeft) - 90.0) < 10.0);
  CHECK(std::abs(interior_deg(sitting, J::SpineMid, J::SpineBase, J::KneeLeft) - 90.0) < 15.0);

  // legs split front/back, arms swing against the legs
  CHECK(walking[J::KneeLeft].z() > walking[J::SpineBase].z());
  CHECK(walking[J::KneeRight].z() < walking[J::SpineBase].z());
  CHECK(walking[J::ElbowLeft].z() < walking[J::ShoulderLeft].z());
  CHECK(walking[J::ElbowRight].z() > walking[J::ShoulderRight].z());

  // ~120° of flexion is a ~60° interior angle
  CHECK(std::abs(interior_deg(crouching, J::HipLeft, J::KneeLeft, J::AnkleLeft) - 60.0) < 10.0);
  CHECK(std::abs(interior_deg(crouching, J::SpineMid, J::SpineBase, J::KneeLeft) - 60.0) < 15.0);
  const double stand_height = standing[J::SpineBase].y() - standing[J::AnkleLeft].y();
  const double crouch_height = crouching[J::SpineBase].y() - crouching[J::AnkleLeft].y();
  CHECK(crouch_height < 0.7 * stand_height);
}

TEST_CASE("model files round-trip every classifier") {
  const auto& ds = small_synth();
  Rng rng(61);
  for (auto kind : {ClassifierKind::Lda, ClassifierKind::Qda, ClassifierKind::Knn1,
                    ClassifierKind::SvmLinear, ClassifierKind::SvmQuadratic, ClassifierKind::SvmCubic}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.seed = 99;
    const FeatureConfig cfg{true, true, AngleMode::AdjacentSegments};
    const auto run = evaluate_run(ds, cfg, spec, SplitSpec{});
    ModelFile file{run.model, cfg, ds.fingerprint()};

    testsupport::TempDir dir;
    save_model(file, dir / "m.json");
    const ModelFile back = load_model(dir / "m.json");
    CHECK(back == file);
    CHECK(serialize_model(back) == serialize_model(file));

    for (int q = 0; q < 100; ++q) {
      const auto& base = ds.records[rng.below(ds.size())].skeleton;
      const auto s = base.map([&](const Point3& p) -> Point3 {
        return p + Point3(0.03 * rng.normal(), 0.03 * rng.normal(), 0.03 * rng.normal());
      });
      const auto fv = extract(s, cfg);
      const auto a = predict(file.model, fv), b = predict(back.model, fv);
      CHECK(a.label == b.label);
      CHECK(a.votes == b.votes);
      CHECK(a.scores == b.scores);
    }
  }
}

TEST_CASE("model loading rejects bad files") {
  const auto& ds = small_synth();
  ClassifierSpec spec;
  spec.kind = ClassifierKind::Lda;
  const FeatureConfig cfg;
  const auto run = evaluate_run(ds, cfg, spec, SplitSpec{});
  const std::string text = serialize_model({run.model, cfg, ds.fingerprint()});

  std::string v0 = text;
  v0.replace(v0.find("\"version\":1"), 11, "\"version\":0");
  CHECK(error_code_of([&] { parse_model(v0); }) == ErrorCode::VersionMismatch);
  CHECK(error_code_of([&] { parse_model(text.substr(0, text.size() / 2)); }) == ErrorCode::CorruptModel);
  CHECK(error_code_of([&] { parse_model("[]"); }) == ErrorCode::CorruptModel);

  std::string wrong_dim = text;
  wrong_dim.replace(wrong_dim.find("\"set\":\"combined\""), 16, "\"set\":\"angles\"");
  CHECK(error_code_of([&] { parse_model(wrong_dim); }) == ErrorCode::CorruptModel);

  CHECK(error_code_of([] { load_model("/nonexistent/model.json"); }) == ErrorCode::IoError);
}
