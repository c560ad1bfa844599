#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "posture/features.hpp"
#include "posture/skeleton.hpp"
#include "posture/standardizer.hpp"
#include "posture/svm.hpp"

namespace posture {

enum class ClassifierKind { Lda, Qda, Knn1, SvmLinear, SvmQuadratic, SvmCubic };

std::string_view classifier_name(ClassifierKind kind) noexcept;
// lda|qda|knn1|svm_linear|svm_quadratic|svm_cubic; throws InvalidConfig.
ClassifierKind classifier_from_name(std::string_view name);
bool is_svm(ClassifierKind kind) noexcept;

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::SvmQuadratic;
  double c = 1.0;
  double tol = 1e-3;
  double kernel_scale = 1.0;
  int max_passes = 50;
  std::uint64_t seed = 0;

  // Kernel implied by `kind`; only meaningful for the SVM kinds.
  KernelSpec kernel() const;
  void validate() const;

  bool operator==(const ClassifierSpec&) const = default;
};

// Ridge added to covariances before inversion: λ·(trace(Σ)/d)·I.
inline constexpr double kCovarianceRidge = 1e-6;

struct PairwiseSvm {
  PostureLabel positive;  // decision > 0 votes for `positive`
  PostureLabel negative;
  BinarySvmModel svm;

  bool operator==(const PairwiseSvm&) const = default;
};

struct OvoSvmParams {
  std::vector<PairwiseSvm> pairs;
  bool operator==(const OvoSvmParams&) const = default;
};

// Linear discriminant: δ_k(x) = x·w_k + offset_k, with w_k = Σ⁻¹μ_k and
// offset_k = −½ μ_kᵀΣ⁻¹μ_k + ln π_k.
struct LdaParams {
  std::vector<PostureLabel> classes;
  Samples means;
  std::vector<double> pooled_inverse_cov;  // d×d, row-major
  Samples weights;
  std::vector<double> offsets;
  std::vector<double> priors;

  bool operator==(const LdaParams&) const = default;
};

// Quadratic discriminant: δ_k(x) = −½ ln|Σ_k| − ½ (x−μ_k)ᵀΣ_k⁻¹(x−μ_k) + ln π_k.
struct QdaParams {
  std::vector<PostureLabel> classes;
  Samples means;
  std::vector<std::vector<double>> inverse_covs;  // each d×d, row-major
  std::vector<double> log_dets;
  std::vector<double> priors;

  bool operator==(const QdaParams&) const = default;
};

struct Knn1Params {
  Samples points;  // standardized
  std::vector<PostureLabel> labels;

  bool operator==(const Knn1Params&) const = default;
};

struct MulticlassModel {
  ClassifierSpec spec;
  Standardizer standardizer;
  std::string feature_fingerprint;
  std::variant<OvoSvmParams, LdaParams, QdaParams, Knn1Params> params;
  std::size_t nonconverged_pairs = 0;

  std::vector<PostureLabel> classes() const;
  bool operator==(const MulticlassModel&) const = default;
};

struct Prediction {
  PostureLabel label = PostureLabel::Standing;
  std::array<int, kLabelCount> votes{};       // one-vs-one only
  std::array<double, kLabelCount> scores{};   // OvO margin sums, discriminant values, or −distance
};

// One row of an OvO decision table.
struct PairDecision {
  PostureLabel positive;
  PostureLabel negative;
  double value;
};

// Majority vote; ties go to the largest summed signed margin, then the lowest
// class index.
Prediction ovo_vote(std::span<const PairDecision> decisions);

// Each trainer fits the standardizer on `x` itself. `x` holds raw feature rows.
MulticlassModel ovo_train(const Samples& x, std::span<const PostureLabel> y,
                          std::string feature_fingerprint, const ClassifierSpec& spec);
MulticlassModel lda_train(const Samples& x, std::span<const PostureLabel> y,
                          std::string feature_fingerprint, const ClassifierSpec& spec = {});
MulticlassModel qda_train(const Samples& x, std::span<const PostureLabel> y,
                          std::string feature_fingerprint, const ClassifierSpec& spec = {});
MulticlassModel knn1_train(const Samples& x, std::span<const PostureLabel> y,
                           std::string feature_fingerprint, const ClassifierSpec& spec = {});

// Dispatches on spec.kind.
MulticlassModel train_classifier(const Samples& x, std::span<const PostureLabel> y,
                                 std::string feature_fingerprint, const ClassifierSpec& spec);

// Throws FingerprintMismatch, DimensionMismatch.
Prediction predict(const MulticlassModel& model, const FeatureVector& fv);
Prediction ovo_predict(const MulticlassModel& model, const FeatureVector& fv);
PostureLabel knn1_predict(const MulticlassModel& model, const FeatureVector& fv);

}  // namespace posture
