#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "posture/standardizer.hpp"

namespace posture {

// Linear: x·y.  Polynomial: (1 + x·y / scale²)^degree.
struct KernelSpec {
  enum class Kind { Linear, Polynomial };

  Kind kind = Kind::Linear;
  int degree = 1;
  double scale = 1.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(int degree, double scale = 1.0) {
    return {Kind::Polynomial, degree, scale};
  }

  // Throws InvalidConfig.
  void validate() const;
  double operator()(std::span<const double> a, std::span<const double> b) const;

  bool operator==(const KernelSpec&) const = default;
};

struct SmoOptions {
  double c = 1.0;
  double tol = 1e-3;
  // Budget of full sweeps over the training set.
  int max_passes = 50;
  std::uint64_t seed = 0;
  // Records the full dual objective after every accepted update. O(n²) per update.
  bool record_objective = false;
};

struct BinarySvmModel {
  Samples support_vectors;
  std::vector<double> dual_coef;  // α_i·y_i, one per support vector
  double bias = 0.0;
  KernelSpec kernel;
  double c = 1.0;
  bool converged = true;

  bool operator==(const BinarySvmModel&) const = default;
};

struct SmoResult {
  BinarySvmModel model;
  std::vector<double> alpha;  // one per training sample
  std::size_t updates = 0;    // accepted pairwise updates
  std::size_t sweeps = 0;     // full passes over the training set
  std::size_t kkt_violations = 0;
  std::vector<double> objective_trace;
};

// Sequential minimal optimization of the soft-margin SVM dual, with Platt's
// working-set heuristics. `y` holds ±1 labels. Throws SingleClass,
// DimensionMismatch, InvalidConfig. Running out of passes is not an error:
// the model comes back with `converged == false`.
SmoResult smo_train(const Samples& x, std::span<const int> y, const KernelSpec& kernel,
                    const SmoOptions& options);

// Σ α_i y_i K(s_i, x) + b. Throws DimensionMismatch.
double svm_decision(const BinarySvmModel& model, std::span<const double> x);

// Σ α_i − ½ ΣΣ α_i α_j y_i y_j K(x_i, x_j)
double dual_objective(const Samples& x, std::span<const int> y, std::span<const double> alpha,
                      const KernelSpec& kernel);

// Number of samples violating the KKT conditions at `tol`.
std::size_t count_kkt_violations(const Samples& x, std::span<const int> y,
                                 std::span<const double> alpha, double bias,
                                 const KernelSpec& kernel, double c, double tol);

}  // namespace posture
