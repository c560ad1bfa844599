#include "posture/svm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "posture/error.hpp"
#include "posture/util.hpp"

namespace posture {

void KernelSpec::validate() const {
  if (kind == Kind::Polynomial && degree < 2) {
    throw Error(ErrorCode::InvalidConfig, "kernel", "degree", std::nullopt,
                "polynomial degree must be >= 2");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidConfig, "kernel", "scale", std::nullopt,
                "kernel scale must be positive");
  }
}

double KernelSpec::operator()(std::span<const double> a, std::span<const double> b) const {
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  if (kind == Kind::Linear) return dot;
  const double base = 1.0 + dot / (scale * scale);
  double out = base;
  for (int p = 1; p < degree; ++p) out *= base;
  return out;
}

namespace {

// Gram matrices above this many samples are evaluated on demand.
constexpr std::size_t kMaxCachedSamples = 6000;
// Hard cap on accepted updates, as a multiple of the sample count.
constexpr std::size_t kUpdatesPerSample = 2000;
// Relative step below which a pairwise update is treated as no progress.
constexpr double kStepEps = 1e-12;

void check_problem(const Samples& x, std::span<const int> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "labels", {}, std::nullopt,
                std::to_string(x.size()) + " samples but " + std::to_string(y.size()) +
                    " labels");
  }
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) {
      has_pos = true;
    } else if (label == -1) {
      has_neg = true;
    } else {
      throw Error(ErrorCode::InvalidConfig, "labels", {}, std::nullopt,
                  "binary labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass);
  const std::size_t d = x.front().size();
  for (const auto& row : x) {
    if (row.size() != d) throw Error(ErrorCode::DimensionMismatch, "sample");
  }
}

class SmoSolver {
 public:
  SmoSolver(const Samples& x, std::span<const int> y, const KernelSpec& kernel,
            const SmoOptions& options)
      : x_(x),
        y_(y),
        kernel_(kernel),
        opt_(options),
        n_(x.size()),
        rng_(options.seed),
        alpha_(n_, 0.0),
        error_(n_) {
    if (n_ <= kMaxCachedSamples) {
      gram_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i; j < n_; ++j) {
          const double v = kernel_(x_[i], x_[j]);
          gram_[i * n_ + j] = v;
          gram_[j * n_ + i] = v;
        }
      }
    }
    for (std::size_t i = 0; i < n_; ++i) error_[i] = -static_cast<double>(y_[i]);
  }

  SmoResult run() {
    SmoResult result;
    const std::size_t max_updates = std::max<std::size_t>(kUpdatesPerSample * n_, 100000);
    bool examine_all = true;
    std::size_t changed = 0;
    while (changed > 0 || examine_all) {
      if (examine_all && result.sweeps >= static_cast<std::size_t>(opt_.max_passes)) break;
      changed = 0;
      if (examine_all) {
        ++result.sweeps;
        for (std::size_t i = 0; i < n_; ++i) changed += examine(i, result);
      } else {
        for (std::size_t i = 0; i < n_; ++i) {
          if (is_free(i)) changed += examine(i, result);
        }
      }
      if (result.updates >= max_updates) break;
      if (examine_all) {
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }

    result.alpha = alpha_;
    result.kkt_violations =
        count_kkt_violations(x_, y_, alpha_, bias_, kernel_, opt_.c, opt_.tol);

    BinarySvmModel& model = result.model;
    model.kernel = kernel_;
    model.c = opt_.c;
    model.bias = bias_;
    model.converged = result.kkt_violations == 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] > 0.0) {
        model.support_vectors.push_back(x_[i]);
        model.dual_coef.push_back(alpha_[i] * y_[i]);
      }
    }
    return result;
  }

 private:
  double k(std::size_t i, std::size_t j) const {
    return gram_.empty() ? kernel_(x_[i], x_[j]) : gram_[i * n_ + j];
  }

  bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < opt_.c; }

  bool violates_kkt(std::size_t i) const {
    const double r = error_[i] * y_[i];
    return (r < -opt_.tol && alpha_[i] < opt_.c) || (r > opt_.tol && alpha_[i] > 0.0);
  }

  // Dual objective restricted to the pair (i1, i2), up to a constant.
  double pair_objective(std::size_t i1, std::size_t i2, double a1, double a2) const {
    const double y1 = y_[i1], y2 = y_[i2];
    const double k11 = k(i1, i1), k22 = k(i2, i2), k12 = k(i1, i2);
    const double v1 = error_[i1] + y1 - bias_ - y1 * alpha_[i1] * k11 - y2 * alpha_[i2] * k12;
    const double v2 = error_[i2] + y2 - bias_ - y1 * alpha_[i1] * k12 - y2 * alpha_[i2] * k22;
    return a1 + a2 - 0.5 * k11 * a1 * a1 - 0.5 * k22 * a2 * a2 - y1 * y2 * k12 * a1 * a2 -
           y1 * a1 * v1 - y2 * a2 * v2;
  }

  bool take_step(std::size_t i1, std::size_t i2, SmoResult& result) {
    if (i1 == i2) return false;
    const double c = opt_.c;
    const double a1_old = alpha_[i1], a2_old = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error_[i1], e2 = error_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(c, c + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - c);
      hi = std::min(c, a1_old + a2_old);
    }
    if (!(lo < hi)) return false;

    const double k11 = k(i1, i1), k22 = k(i2, i2), k12 = k(i1, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 0.0) {
      a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      const double obj_lo = pair_objective(i1, i2, a1_old + s * (a2_old - lo), lo);
      const double obj_hi = pair_objective(i1, i2, a1_old + s * (a2_old - hi), hi);
      const double slack = kStepEps * (1.0 + std::abs(obj_lo) + std::abs(obj_hi));
      if (obj_lo > obj_hi + slack) {
        a2 = lo;
      } else if (obj_hi > obj_lo + slack) {
        a2 = hi;
      } else {
        return false;
      }
    }
    if (a2 < kStepEps * c) a2 = 0.0;
    if (a2 > c * (1.0 - kStepEps)) a2 = c;
    if (std::abs(a2 - a2_old) < kStepEps * (a2 + a2_old + kStepEps)) return false;

    double a1 = std::clamp(a1_old + s * (a2_old - a2), 0.0, c);
    if (a1 < kStepEps * c) a1 = 0.0;
    if (a1 > c * (1.0 - kStepEps)) a1 = c;

    const double t1 = y1 * (a1 - a1_old);
    const double t2 = y2 * (a2 - a2_old);
    const double b1 = bias_ - e1 - t1 * k11 - t2 * k12;
    const double b2 = bias_ - e2 - t1 * k12 - t2 * k22;
    double b_new;
    if (a1 > 0.0 && a1 < c) {
      b_new = b1;
    } else if (a2 > 0.0 && a2 < c) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }
    const double db = b_new - bias_;
    for (std::size_t i = 0; i < n_; ++i) error_[i] += t1 * k(i1, i) + t2 * k(i2, i) + db;
    alpha_[i1] = a1;
    alpha_[i2] = a2;
    bias_ = b_new;
    ++result.updates;
    if (opt_.record_objective) {
      result.objective_trace.push_back(dual_objective(x_, y_, alpha_, kernel_));
    }
    return true;
  }

  std::size_t examine(std::size_t i2, SmoResult& result) {
    if (!violates_kkt(i2)) return 0;
    const double e2 = error_[i2];

    // Second-choice heuristic: maximize |E1 − E2| over free multipliers.
    std::size_t best = n_;
    double best_gap = -1.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!is_free(i)) continue;
      ++free_count;
      const double gap = std::abs(error_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (free_count > 1 && best < n_ && take_step(best, i2, result)) return 1;

    const std::size_t start_free = rng_.below(n_);
    for (std::size_t off = 0; off < n_; ++off) {
      const std::size_t i1 = (start_free + off) % n_;
      if (is_free(i1) && take_step(i1, i2, result)) return 1;
    }
    const std::size_t start_all = rng_.below(n_);
    for (std::size_t off = 0; off < n_; ++off) {
      const std::size_t i1 = (start_all + off) % n_;
      if (take_step(i1, i2, result)) return 1;
    }
    return 0;
  }

  const Samples& x_;
  std::span<const int> y_;
  KernelSpec kernel_;
  SmoOptions opt_;
  std::size_t n_;
  Rng rng_;
  std::vector<double> gram_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double bias_ = 0.0;
};

}  // namespace

SmoResult smo_train(const Samples& x, std::span<const int> y, const KernelSpec& kernel,
                    const SmoOptions& options) {
  kernel.validate();
  if (!(options.c > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "c", {}, std::nullopt, "C must be positive");
  }
  if (!(options.tol > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "tol", {}, std::nullopt, "tol must be positive");
  }
  if (x.size() < 2) throw Error(ErrorCode::SingleClass, {}, {}, std::nullopt, "need >= 2 samples");
  check_problem(x, y);
  return SmoSolver(x, y, kernel, options).run();
}

double svm_decision(const BinarySvmModel& model, std::span<const double> x) {
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    const auto& sv = model.support_vectors[i];
    if (sv.size() != x.size()) {
      throw Error(ErrorCode::DimensionMismatch, "sample", {}, std::nullopt,
                  "expected " + std::to_string(sv.size()) + " features, got " +
                      std::to_string(x.size()));
    }
    f += model.dual_coef[i] * model.kernel(sv, x);
  }
  return f;
}

double dual_objective(const Samples& x, std::span<const int> y, std::span<const double> alpha,
                      const KernelSpec& kernel) {
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (alpha[j] == 0.0) continue;
      quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(x[i], x[j]);
    }
  }
  return linear - 0.5 * quad;
}

std::size_t count_kkt_violations(const Samples& x, std::span<const int> y,
                                 std::span<const double> alpha, double bias,
                                 const KernelSpec& kernel, double c, double tol) {
  std::size_t violations = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = bias;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (alpha[j] != 0.0) f += alpha[j] * y[j] * kernel(x[j], x[i]);
    }
    const double margin = y[i] * f;
    const bool ok = alpha[i] == 0.0   ? margin >= 1.0 - tol
                    : alpha[i] == c   ? margin <= 1.0 + tol
                                      : std::abs(margin - 1.0) <= tol;
    if (!ok) ++violations;
  }
  return violations;
}

}  // namespace posture
