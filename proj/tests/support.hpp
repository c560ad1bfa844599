// Helpers shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Geometry>
#include <unistd.h>

#include "posture/error.hpp"
#include "posture/skeleton.hpp"
#include "posture/synth.hpp"
#include "posture/util.hpp"

namespace testsupport {

using posture::Point3;
using posture::Rng;
using posture::Skeleton;

// A class template jittered joint by joint, so geometry is generic.
inline Skeleton random_skeleton(Rng& rng, double jitter = 0.05) {
  const auto label = posture::label_at(rng.below(posture::kLabelCount));
  auto pos = posture::pose_template(label).positions();
  for (auto& p : pos) {
    for (int a = 0; a < 3; ++a) p[a] += jitter * rng.normal();
  }
  return Skeleton::from_positions(pos);
}

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

inline Skeleton transform(const Skeleton& s, const Eigen::Matrix3d& r, const Point3& t,
                          double scale) {
  return s.map([&](const Point3& p) -> Point3 { return scale * (r * p) + t; });
}

// Skeleton with every joint at `fill` except the ones given.
inline Skeleton skeleton_with(std::initializer_list<std::pair<posture::JointId, Point3>> joints,
                              const Point3& fill = Point3(0, 0, 0)) {
  Skeleton::Positions pos;
  pos.fill(fill);
  for (const auto& [j, p] : joints) pos[posture::index(j)] = p;
  return Skeleton::from_positions(pos);
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("posture_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

template <typename F>
posture::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const posture::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a posture::Error");
}

}  // namespace testsupport
