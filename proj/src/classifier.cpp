#include "posture/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posture/error.hpp"
#include "posture/util.hpp"

namespace posture {

namespace {

constexpr std::array<std::string_view, 6> kClassifierNames = {
    "lda", "qda", "knn1", "svm_linear", "svm_quadratic", "svm_cubic",
};

void check_labels(const Samples& x, std::span<const PostureLabel> y) {
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet);
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "labels", {}, std::nullopt,
                std::to_string(x.size()) + " samples but " + std::to_string(y.size()) +
                    " labels");
  }
}

}  // namespace

std::string_view classifier_name(ClassifierKind kind) noexcept {
  return kClassifierNames[static_cast<std::size_t>(kind)];
}

ClassifierKind classifier_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kClassifierNames.size(); ++i) {
    if (kClassifierNames[i] == name) return static_cast<ClassifierKind>(i);
  }
  throw Error(ErrorCode::InvalidConfig, "classifier", std::string(name), std::nullopt,
              "expected lda|qda|knn1|svm_linear|svm_quadratic|svm_cubic");
}

bool is_svm(ClassifierKind kind) noexcept {
  return kind == ClassifierKind::SvmLinear || kind == ClassifierKind::SvmQuadratic ||
         kind == ClassifierKind::SvmCubic;
}

KernelSpec ClassifierSpec::kernel() const {
  switch (kind) {
    case ClassifierKind::SvmQuadratic: return KernelSpec::polynomial(2, kernel_scale);
    case ClassifierKind::SvmCubic: return KernelSpec::polynomial(3, kernel_scale);
    default: return KernelSpec{KernelSpec::Kind::Linear, 1, kernel_scale};
  }
}

void ClassifierSpec::validate() const {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidConfig, "c", {}, std::nullopt, "must be > 0");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tol", {}, std::nullopt, "must be > 0");
  if (max_passes < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_passes", {}, std::nullopt, "must be >= 1");
  }
  kernel().validate();
}

std::vector<PostureLabel> MulticlassModel::classes() const {
  return std::visit(
      [](const auto& p) -> std::vector<PostureLabel> {
        using T = std::decay_t<decltype(p)>;
        std::vector<PostureLabel> out;
        if constexpr (std::is_same_v<T, OvoSvmParams>) {
          for (const auto& pair : p.pairs) {
            out.push_back(pair.positive);
            out.push_back(pair.negative);
          }
        } else if constexpr (std::is_same_v<T, Knn1Params>) {
          out = p.labels;
        } else {
          out = p.classes;
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      },
      params);
}

Prediction ovo_vote(std::span<const PairDecision> decisions) {
  Prediction out;
  std::array<bool, kLabelCount> present{};
  for (const auto& d : decisions) {
    present[index(d.positive)] = true;
    present[index(d.negative)] = true;
    out.scores[index(d.positive)] += d.value;
    out.scores[index(d.negative)] -= d.value;
    ++out.votes[index(d.value > 0.0 ? d.positive : d.negative)];
  }
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    if (!present[k]) continue;
    if (!best || out.votes[k] > out.votes[*best] ||
        (out.votes[k] == out.votes[*best] && out.scores[k] > out.scores[*best])) {
      best = k;
    }
  }
  out.label = label_at(best.value_or(0));
  return out;
}

MulticlassModel ovo_train(const Samples& x, std::span<const PostureLabel> y,
                          std::string feature_fingerprint, const ClassifierSpec& spec) {
  spec.validate();
  check_labels(x, y);
  MulticlassModel model;
  model.spec = spec;
  model.feature_fingerprint = std::move(feature_fingerprint);
  model.standardizer = Standardizer::fit(x);
  const Samples z = model.standardizer.apply_all(x);

  std::array<std::vector<std::size_t>, kLabelCount> members;
  for (std::size_t i = 0; i < y.size(); ++i) members[index(y[i])].push_back(i);
  std::vector<std::size_t> present;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    if (!members[k].empty()) present.push_back(k);
  }
  if (present.size() < 2) throw Error(ErrorCode::SingleClass);

  OvoSvmParams params;
  std::uint64_t pair_index = 0;
  for (std::size_t a = 0; a < present.size(); ++a) {
    for (std::size_t b = a + 1; b < present.size(); ++b, ++pair_index) {
      Samples sub;
      std::vector<int> labels;
      // Keep original record order so results do not depend on grouping.
      std::vector<std::size_t> rows = members[present[a]];
      rows.insert(rows.end(), members[present[b]].begin(), members[present[b]].end());
      std::sort(rows.begin(), rows.end());
      for (std::size_t r : rows) {
        sub.push_back(z[r]);
        labels.push_back(index(y[r]) == present[a] ? 1 : -1);
      }
      SmoOptions opt;
      opt.c = spec.c;
      opt.tol = spec.tol;
      opt.max_passes = spec.max_passes;
      opt.seed = splitmix64(spec.seed ^ splitmix64(pair_index));
      SmoResult fit = smo_train(sub, labels, spec.kernel(), opt);
      if (!fit.model.converged) ++model.nonconverged_pairs;
      params.pairs.push_back({label_at(present[a]), label_at(present[b]), std::move(fit.model)});
    }
  }
  model.params = std::move(params);
  return model;
}

MulticlassModel knn1_train(const Samples& x, std::span<const PostureLabel> y,
                           std::string feature_fingerprint, const ClassifierSpec& spec) {
  check_labels(x, y);
  MulticlassModel model;
  model.spec = spec;
  model.spec.kind = ClassifierKind::Knn1;
  model.feature_fingerprint = std::move(feature_fingerprint);
  model.standardizer = Standardizer::fit(x);
  Knn1Params params;
  params.points = model.standardizer.apply_all(x);
  params.labels.assign(y.begin(), y.end());
  model.params = std::move(params);
  return model;
}

MulticlassModel train_classifier(const Samples& x, std::span<const PostureLabel> y,
                                 std::string feature_fingerprint, const ClassifierSpec& spec) {
  switch (spec.kind) {
    case ClassifierKind::Lda: return lda_train(x, y, std::move(feature_fingerprint), spec);
    case ClassifierKind::Qda: return qda_train(x, y, std::move(feature_fingerprint), spec);
    case ClassifierKind::Knn1: return knn1_train(x, y, std::move(feature_fingerprint), spec);
    default: return ovo_train(x, y, std::move(feature_fingerprint), spec);
  }
}

namespace {

std::vector<double> standardized_input(const MulticlassModel& model, const FeatureVector& fv) {
  if (fv.config_fingerprint != model.feature_fingerprint) {
    throw Error(ErrorCode::FingerprintMismatch, fv.config_fingerprint,
                model.feature_fingerprint, std::nullopt,
                "feature vector was extracted with a different configuration");
  }
  return model.standardizer.apply(fv.values);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Prediction argmax_scores(const std::vector<PostureLabel>& classes,
                         const std::vector<double>& scores) {
  Prediction out;
  out.scores.fill(-std::numeric_limits<double>::infinity());
  std::size_t best = 0;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    out.scores[index(classes[k])] = scores[k];
    if (scores[k] > scores[best]) best = k;
  }
  out.label = classes[best];
  return out;
}

Prediction predict_lda(const LdaParams& p, std::span<const double> z) {
  std::vector<double> scores(p.classes.size());
  for (std::size_t k = 0; k < p.classes.size(); ++k) scores[k] = dot(z, p.weights[k]) + p.offsets[k];
  return argmax_scores(p.classes, scores);
}

Prediction predict_qda(const QdaParams& p, std::span<const double> z) {
  const std::size_t d = z.size();
  std::vector<double> scores(p.classes.size());
  std::vector<double> diff(d);
  for (std::size_t k = 0; k < p.classes.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) diff[i] = z[i] - p.means[k][i];
    double quad = 0.0;
    const auto& inv = p.inverse_covs[k];
    for (std::size_t i = 0; i < d; ++i) {
      const double* row = inv.data() + i * d;
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += row[j] * diff[j];
      quad += diff[i] * acc;
    }
    scores[k] = -0.5 * p.log_dets[k] - 0.5 * quad + std::log(p.priors[k]);
  }
  return argmax_scores(p.classes, scores);
}

Prediction predict_knn1(const Knn1Params& p, std::span<const double> z) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    double dist = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double diff = p.points[i][k] - z[k];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  Prediction out;
  out.label = p.labels[best];
  out.scores.fill(-std::numeric_limits<double>::infinity());
  out.scores[index(out.label)] = -std::sqrt(best_dist);
  return out;
}

}  // namespace

Prediction predict(const MulticlassModel& model, const FeatureVector& fv) {
  const std::vector<double> z = standardized_input(model, fv);
  return std::visit(
      [&](const auto& p) -> Prediction {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OvoSvmParams>) {
          std::vector<PairDecision> table;
          table.reserve(p.pairs.size());
          for (const auto& pair : p.pairs) {
            table.push_back({pair.positive, pair.negative, svm_decision(pair.svm, z)});
          }
          return ovo_vote(table);
        } else if constexpr (std::is_same_v<T, LdaParams>) {
          return predict_lda(p, z);
        } else if constexpr (std::is_same_v<T, QdaParams>) {
          return predict_qda(p, z);
        } else {
          return predict_knn1(p, z);
        }
      },
      model.params);
}

Prediction ovo_predict(const MulticlassModel& model, const FeatureVector& fv) {
  if (!std::holds_alternative<OvoSvmParams>(model.params)) {
    throw Error(ErrorCode::InvalidConfig, "model", std::string(classifier_name(model.spec.kind)),
                std::nullopt, "not a one-vs-one SVM model");
  }
  return predict(model, fv);
}

PostureLabel knn1_predict(const MulticlassModel& model, const FeatureVector& fv) {
  if (!std::holds_alternative<Knn1Params>(model.params)) {
    throw Error(ErrorCode::InvalidConfig, "model", std::string(classifier_name(model.spec.kind)),
                std::nullopt, "not a nearest-neighbor model");
  }
  return predict(model, fv).label;
}

}  // namespace posture
