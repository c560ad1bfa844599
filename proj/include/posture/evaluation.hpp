#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posture/classifier.hpp"
#include "posture/dataset.hpp"
#include "posture/features.hpp"

namespace posture {

enum class Stratify { Label, LabelAndParticipant };

std::string_view stratify_name(Stratify s) noexcept;
// label|label_participant; throws InvalidConfig.
Stratify stratify_from_name(std::string_view name);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  Stratify stratify_by = Stratify::Label;
  // Train and test on the full dataset. Only for oracle checks; reports flag it.
  bool resubstitution = false;

  void validate() const;
  bool operator==(const SplitSpec&) const = default;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded stratified split. The overall train count is ⌈fraction·N⌉ and is
// apportioned to strata by largest remainder (ties to the earlier stratum),
// then each stratum keeps at least one train and, when it has two or more
// members, one test observation. Index lists are sorted ascending.
// Throws ClassTooSmall when a present class has fewer than 2 observations.
Split stratified_split(const LabeledDataset& ds, const SplitSpec& spec);

class ConfusionMatrix {
 public:
  using Counts = std::array<std::array<std::uint64_t, kLabelCount>, kLabelCount>;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(const Counts& counts) : counts_(counts) {}

  // Rows are true classes, columns predicted classes.
  const Counts& counts() const noexcept { return counts_; }
  std::uint64_t at(PostureLabel truth, PostureLabel predicted) const noexcept {
    return counts_[index(truth)][index(predicted)];
  }
  std::uint64_t total() const noexcept;
  std::uint64_t row_total(PostureLabel truth) const noexcept;
  std::uint64_t trace() const noexcept;

  // trace / total; 0 for an empty matrix.
  double accuracy() const noexcept;
  // Diagonal over row total; 0 for a class with no test observations.
  double class_accuracy(PostureLabel truth) const noexcept;
  // Row-normalized percentages; an empty row is all zeros.
  std::array<std::array<double, kLabelCount>, kLabelCount> row_percentages() const noexcept;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  Counts counts_{};
};

// Throws LengthMismatch, EmptyInput.
ConfusionMatrix confusion_matrix(std::span<const PostureLabel> truth,
                                 std::span<const PostureLabel> predicted);

// Percentage with one decimal, rounded half-up from exact integer arithmetic,
// e.g. format_percent(12, 13) == "92.3%".
std::string format_percent(std::uint64_t count, std::uint64_t total);

struct Timings {
  double extract_ms = 0.0;
  double train_ms = 0.0;
  double predict_ms = 0.0;
};

inline constexpr int kReportVersion = 1;

struct EvaluationReport {
  ConfusionMatrix confusion;
  ClassifierSpec classifier;
  FeatureConfig features;
  SplitSpec split;
  std::string dataset_fingerprint;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t nonconverged_pairs = 0;
  Timings timings;

  // Equality ignores timings.
  bool same_result(const EvaluationReport& other) const;
};

// Report plus the artefacts behind it, for inspection.
struct EvaluationRun {
  EvaluationReport report;
  MulticlassModel model;
  Split split;
  std::vector<PostureLabel> predictions;  // aligned with split.test
};

// Extracts features for every record, fits on the train partition only,
// and scores the test partition. Throws on unlabeled records (ParseError).
EvaluationRun evaluate_run(const LabeledDataset& ds, const FeatureConfig& features,
                           const ClassifierSpec& classifier, const SplitSpec& split);
EvaluationReport evaluate(const LabeledDataset& ds, const FeatureConfig& features,
                          const ClassifierSpec& classifier, const SplitSpec& split);

// Classifier rows and feature-set columns of the comparison grid.
std::vector<ClassifierKind> grid_classifiers();
std::vector<FeatureConfig> grid_feature_sets(AngleMode mode);

// Evaluates every (classifier, feature set) cell; cells run on up to `threads`
// worker threads. Reports come back row-major in the order given.
std::vector<EvaluationReport> evaluate_grid(const LabeledDataset& ds,
                                            std::span<const ClassifierKind> classifiers,
                                            std::span<const FeatureConfig> feature_sets,
                                            const ClassifierSpec& base, const SplitSpec& split,
                                            unsigned threads = 1);

enum class ReportFormat { Text, Csv, Json };
// text|csv|json; throws InvalidConfig.
ReportFormat report_format_from_name(std::string_view name);

std::string render_report(const EvaluationReport& report, ReportFormat format);
// Inverse of the csv/json renderers. Throws ParseError.
EvaluationReport parse_report_json(std::string_view text);
EvaluationReport parse_report_csv(std::string_view text);

// Accuracy table, one row per classifier and one column per feature set.
std::string render_grid(std::span<const EvaluationReport> reports,
                        std::span<const ClassifierKind> classifiers,
                        std::span<const FeatureConfig> feature_sets, ReportFormat format);

}  // namespace posture
