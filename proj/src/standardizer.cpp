#include "posture/standardizer.hpp"

#include <cmath>
#include <string>

#include "posture/error.hpp"

namespace posture {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() != stddev_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "standardizer", {}, std::nullopt,
                "mean and stddev lengths differ");
  }
  for (double s : stddev_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::DimensionMismatch, "standardizer", {}, std::nullopt,
                  "stddev entries must be positive");
    }
  }
}

Standardizer Standardizer::fit(const Samples& x) {
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet);
  const std::size_t d = x.front().size();
  for (const auto& row : x) {
    if (row.size() != d) {
      throw Error(ErrorCode::DimensionMismatch, "sample", {}, std::nullopt,
                  "expected " + std::to_string(d) + " features, got " +
                      std::to_string(row.size()));
    }
  }
  const double n = static_cast<double>(x.size());
  std::vector<double> mean(d, 0.0), stddev(d, 0.0);
  for (const auto& row : x) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= n;
  // Two-pass variance around the mean.
  for (const auto& row : x) {
    for (std::size_t k = 0; k < d; ++k) {
      const double dev = row[k] - mean[k];
      stddev[k] += dev * dev;
    }
  }
  for (double& s : stddev) {
    s = std::sqrt(s / n);
    if (s < kMinStddev) s = 1.0;
  }
  Standardizer out;
  out.mean_ = std::move(mean);
  out.stddev_ = std::move(stddev);
  return out;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != mean_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sample", {}, std::nullopt,
                "expected " + std::to_string(mean_.size()) + " features, got " +
                    std::to_string(x.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean_[k]) / stddev_[k];
  return out;
}

Samples Standardizer::apply_all(const Samples& x) const {
  Samples out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(apply(row));
  return out;
}

}  // namespace posture
