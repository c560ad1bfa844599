#include "posture/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include "posture/error.hpp"
#include "posture/util.hpp"

namespace posture {

std::string_view stratify_name(Stratify s) noexcept {
  return s == Stratify::Label ? "label" : "label_participant";
}

Stratify stratify_from_name(std::string_view name) {
  if (name == "label") return Stratify::Label;
  if (name == "label_participant") return Stratify::LabelAndParticipant;
  throw Error(ErrorCode::InvalidConfig, "stratify", std::string(name), std::nullopt,
              "expected label|label_participant");
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "train_fraction", format_double(train_fraction),
                std::nullopt, "must be in (0, 1)");
  }
}

namespace {

PostureLabel require_label(const LabeledDataset& ds, std::size_t i) {
  if (!ds.records[i].label) {
    throw Error(ErrorCode::ParseError, "record " + std::to_string(i + 1), {}, std::nullopt,
                "record has no label");
  }
  return *ds.records[i].label;
}

}  // namespace

Split stratified_split(const LabeledDataset& ds, const SplitSpec& spec) {
  spec.validate();
  Split split;
  if (spec.resubstitution) {
    for (std::size_t i = 0; i < ds.size(); ++i) require_label(ds, i);
    split.train.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) split.train[i] = i;
    split.test = split.train;
    return split;
  }

  std::array<std::size_t, kLabelCount> class_counts{};
  std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::size_t k = index(require_label(ds, i));
    ++class_counts[k];
    std::string participant =
        spec.stratify_by == Stratify::LabelAndParticipant ? ds.records[i].meta.participant_id : "";
    strata[{k, std::move(participant)}].push_back(i);
  }
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    if (class_counts[k] == 1) {
      throw Error(ErrorCode::ClassTooSmall, std::string(label_name(label_at(k))), {},
                  std::nullopt, "a class needs at least 2 observations to be split");
    }
  }
  if (ds.size() == 0) throw Error(ErrorCode::EmptyInput, "dataset");

  constexpr double kSlack = 1e-9;
  const double f = spec.train_fraction;
  const auto target = static_cast<std::size_t>(std::ceil(f * static_cast<double>(ds.size()) - kSlack));

  struct Quota {
    std::size_t base;
    double remainder;
  };
  std::vector<std::vector<std::size_t>*> groups;
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (auto& [key, members] : strata) {
    const double q = f * static_cast<double>(members.size());
    const auto base = static_cast<std::size_t>(std::floor(q + kSlack));
    groups.push_back(&members);
    quotas.push_back({base, std::max(0.0, q - static_cast<double>(base))});
    assigned += base;
  }
  std::vector<std::size_t> order(groups.size());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  std::vector<std::size_t> train_count(groups.size());
  for (std::size_t s = 0; s < groups.size(); ++s) train_count[s] = quotas[s].base;
  for (std::size_t r = 0; assigned < target && r < order.size(); ++r, ++assigned) {
    ++train_count[order[r]];
  }

  Rng rng(spec.seed);
  for (std::size_t s = 0; s < groups.size(); ++s) {
    std::vector<std::size_t> members = *groups[s];
    const std::size_t n = members.size();
    std::size_t take = std::max<std::size_t>(train_count[s], 1);
    if (n >= 2) take = std::min(take, n - 1);
    for (std::size_t i = n; i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    split.train.insert(split.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    split.test.insert(split.test.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t t = 0;
  for (const auto& row : counts_) {
    for (auto c : row) t += c;
  }
  return t;
}

std::uint64_t ConfusionMatrix::row_total(PostureLabel truth) const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts_[index(truth)]) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t k = 0; k < kLabelCount; ++k) t += counts_[k][k];
  return t;
}

double ConfusionMatrix::accuracy() const noexcept {
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
}

double ConfusionMatrix::class_accuracy(PostureLabel truth) const noexcept {
  const auto t = row_total(truth);
  return t == 0 ? 0.0 : static_cast<double>(at(truth, truth)) / static_cast<double>(t);
}

std::array<std::array<double, kLabelCount>, kLabelCount> ConfusionMatrix::row_percentages()
    const noexcept {
  std::array<std::array<double, kLabelCount>, kLabelCount> out{};
  for (std::size_t r = 0; r < kLabelCount; ++r) {
    const auto t = row_total(label_at(r));
    if (t == 0) continue;
    for (std::size_t c = 0; c < kLabelCount; ++c) {
      out[r][c] = 100.0 * static_cast<double>(counts_[r][c]) / static_cast<double>(t);
    }
  }
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const PostureLabel> truth,
                                 std::span<const PostureLabel> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, {}, {}, std::nullopt,
                std::to_string(truth.size()) + " truths vs " + std::to_string(predicted.size()) +
                    " predictions");
  }
  if (truth.empty()) throw Error(ErrorCode::EmptyInput);
  ConfusionMatrix::Counts counts{};
  for (std::size_t i = 0; i < truth.size(); ++i) ++counts[index(truth[i])][index(predicted[i])];
  return ConfusionMatrix(counts);
}

std::string format_percent(std::uint64_t count, std::uint64_t total) {
  if (total == 0) return "n/a";
  // tenths of a percent, half-up: floor((2000·count + total) / (2·total))
  const std::uint64_t tenths = (2000 * count + total) / (2 * total);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

bool EvaluationReport::same_result(const EvaluationReport& o) const {
  return confusion == o.confusion && classifier == o.classifier && features == o.features &&
         split == o.split && dataset_fingerprint == o.dataset_fingerprint &&
         train_size == o.train_size && test_size == o.test_size &&
         nonconverged_pairs == o.nonconverged_pairs;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

EvaluationRun evaluate_run(const LabeledDataset& ds, const FeatureConfig& features,
                           const ClassifierSpec& classifier, const SplitSpec& split_spec) {
  features.validate();
  classifier.validate();
  EvaluationRun run;
  run.split = stratified_split(ds, split_spec);

  auto t0 = std::chrono::steady_clock::now();
  std::vector<FeatureVector> vectors;
  vectors.reserve(ds.size());
  for (const auto& obs : ds.records) vectors.push_back(extract(obs.skeleton, features));
  run.report.timings.extract_ms = elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  Samples x;
  std::vector<PostureLabel> y;
  for (std::size_t i : run.split.train) {
    x.push_back(vectors[i].values);
    y.push_back(*ds.records[i].label);
  }
  run.model = train_classifier(x, y, features.fingerprint(), classifier);
  run.report.timings.train_ms = elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<PostureLabel> truth;
  for (std::size_t i : run.split.test) {
    truth.push_back(*ds.records[i].label);
    run.predictions.push_back(predict(run.model, vectors[i]).label);
  }
  run.report.timings.predict_ms = elapsed_ms(t0);

  EvaluationReport& r = run.report;
  r.confusion = confusion_matrix(truth, run.predictions);
  r.classifier = run.model.spec;
  r.features = features;
  r.split = split_spec;
  r.dataset_fingerprint = ds.fingerprint();
  r.train_size = run.split.train.size();
  r.test_size = run.split.test.size();
  r.nonconverged_pairs = run.model.nonconverged_pairs;
  return run;
}

EvaluationReport evaluate(const LabeledDataset& ds, const FeatureConfig& features,
                          const ClassifierSpec& classifier, const SplitSpec& split) {
  return evaluate_run(ds, features, classifier, split).report;
}

std::vector<ClassifierKind> grid_classifiers() {
  return {ClassifierKind::Lda, ClassifierKind::Knn1, ClassifierKind::SvmLinear,
          ClassifierKind::SvmQuadratic, ClassifierKind::SvmCubic};
}

std::vector<FeatureConfig> grid_feature_sets(AngleMode mode) {
  return {FeatureConfig{false, true, mode}, FeatureConfig{true, false, mode},
          FeatureConfig{true, true, mode}};
}

std::vector<EvaluationReport> evaluate_grid(const LabeledDataset& ds,
                                            std::span<const ClassifierKind> classifiers,
                                            std::span<const FeatureConfig> feature_sets,
                                            const ClassifierSpec& base, const SplitSpec& split,
                                            unsigned threads) {
  const std::size_t cells = classifiers.size() * feature_sets.size();
  std::vector<EvaluationReport> reports(cells);
  std::vector<std::exception_ptr> errors(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) {
      try {
        ClassifierSpec spec = base;
        spec.kind = classifiers[cell / feature_sets.size()];
        reports[cell] = evaluate(ds, feature_sets[cell % feature_sets.size()], spec, split);
      } catch (...) {
        errors[cell] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), cells));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

ReportFormat report_format_from_name(std::string_view name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw Error(ErrorCode::InvalidConfig, "format", std::string(name), std::nullopt,
              "expected text|csv|json");
}

}  // namespace posture
