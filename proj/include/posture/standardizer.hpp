#pragma once

#include <span>
#include <vector>

namespace posture {

// Row-per-sample feature matrix.
using Samples = std::vector<std::vector<double>>;

// Below this a training stddev is replaced by 1.
inline constexpr double kMinStddev = 1e-12;

class Standardizer {
 public:
  Standardizer() = default;
  // Throws DimensionMismatch on length mismatch or a non-positive stddev.
  Standardizer(std::vector<double> mean, std::vector<double> stddev);

  // Per-feature mean and population stddev. Throws EmptyTrainingSet, DimensionMismatch.
  static Standardizer fit(const Samples& x);

  std::size_t dimension() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& stddev() const noexcept { return stddev_; }

  std::vector<double> apply(std::span<const double> x) const;
  Samples apply_all(const Samples& x) const;

  bool operator==(const Standardizer&) const = default;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

inline Standardizer fit_standardizer(const Samples& x) { return Standardizer::fit(x); }

}  // namespace posture
