// Report documents: text tables, key/value CSV and versioned JSON.

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "posture/error.hpp"
#include "posture/evaluation.hpp"
#include "posture/util.hpp"

namespace posture {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string display_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Lda: return "Linear Discriminant";
    case ClassifierKind::Qda: return "Quadratic Discriminant";
    case ClassifierKind::Knn1: return "Fine KNN";
    case ClassifierKind::SvmLinear: return "Linear SVM";
    case ClassifierKind::SvmQuadratic: return "Quadratic SVM";
    case ClassifierKind::SvmCubic: return "Cubic SVM";
  }
  return "?";
}

std::string display_name(const FeatureConfig& f) {
  if (f.use_distances && f.use_angles) return "Combined features";
  return f.use_distances ? "3D joint distances" : "Geometrical angles";
}

ordered_json report_to_json(const EvaluationReport& r) {
  ordered_json j;
  j["version"] = kReportVersion;
  j["classifier"] = {{"name", std::string(classifier_name(r.classifier.kind))},
                     {"c", r.classifier.c},
                     {"tol", r.classifier.tol},
                     {"kernel_scale", r.classifier.kernel_scale},
                     {"max_passes", r.classifier.max_passes},
                     {"seed", r.classifier.seed}};
  j["features"] = {{"set", r.features.features_name()},
                   {"angle_mode", r.features.angle_mode_name()},
                   {"fingerprint", r.features.fingerprint()}};
  j["split"] = {{"train_fraction", r.split.train_fraction},
                {"seed", r.split.seed},
                {"stratify_by", std::string(stratify_name(r.split.stratify_by))},
                {"resubstitution", r.split.resubstitution},
                {"train_size", r.train_size},
                {"test_size", r.test_size}};
  j["dataset_fingerprint"] = r.dataset_fingerprint;
  ordered_json classes = ordered_json::array();
  for (std::size_t k = 0; k < kLabelCount; ++k) classes.push_back(std::string(label_name(label_at(k))));
  j["classes"] = std::move(classes);
  j["counts"] = r.confusion.counts();
  j["accuracy"] = r.confusion.accuracy();
  ordered_json per_class = ordered_json::array();
  for (std::size_t k = 0; k < kLabelCount; ++k) per_class.push_back(r.confusion.class_accuracy(label_at(k)));
  j["per_class"] = std::move(per_class);
  j["nonconverged_pairs"] = r.nonconverged_pairs;
  j["timings_ms"] = {{"extract", r.timings.extract_ms},
                     {"train", r.timings.train_ms},
                     {"predict", r.timings.predict_ms}};
  return j;
}

EvaluationReport report_from_json(const json& j) {
  if (j.at("version").get<int>() != kReportVersion) {
    throw Error(ErrorCode::VersionMismatch, "report", std::to_string(j.at("version").get<int>()));
  }
  EvaluationReport r;
  const json& c = j.at("classifier");
  r.classifier.kind = classifier_from_name(c.at("name").get<std::string>());
  r.classifier.c = c.at("c").get<double>();
  r.classifier.tol = c.at("tol").get<double>();
  r.classifier.kernel_scale = c.at("kernel_scale").get<double>();
  r.classifier.max_passes = c.at("max_passes").get<int>();
  r.classifier.seed = c.at("seed").get<std::uint64_t>();
  const json& f = j.at("features");
  r.features = FeatureConfig::parse(f.at("set").get<std::string>(), f.at("angle_mode").get<std::string>());
  const json& s = j.at("split");
  r.split.train_fraction = s.at("train_fraction").get<double>();
  r.split.seed = s.at("seed").get<std::uint64_t>();
  r.split.stratify_by = stratify_from_name(s.at("stratify_by").get<std::string>());
  r.split.resubstitution = s.at("resubstitution").get<bool>();
  r.train_size = s.at("train_size").get<std::size_t>();
  r.test_size = s.at("test_size").get<std::size_t>();
  r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
  r.confusion = ConfusionMatrix(j.at("counts").get<ConfusionMatrix::Counts>());
  r.nonconverged_pairs = j.at("nonconverged_pairs").get<std::size_t>();
  const json& t = j.at("timings_ms");
  r.timings = {t.at("extract").get<double>(), t.at("train").get<double>(),
               t.at("predict").get<double>()};
  return r;
}

// RFC 4180 quoting.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::pair<std::string, std::string>> report_fields(const EvaluationReport& r) {
  std::vector<std::pair<std::string, std::string>> f;
  auto add = [&f](std::string key, std::string value) { f.emplace_back(std::move(key), std::move(value)); };
  add("version", std::to_string(kReportVersion));
  add("classifier", std::string(classifier_name(r.classifier.kind)));
  add("c", format_double(r.classifier.c));
  add("tol", format_double(r.classifier.tol));
  add("kernel_scale", format_double(r.classifier.kernel_scale));
  add("max_passes", std::to_string(r.classifier.max_passes));
  add("classifier_seed", std::to_string(r.classifier.seed));
  add("features", r.features.features_name());
  add("angle_mode", r.features.angle_mode_name());
  add("feature_fingerprint", r.features.fingerprint());
  add("train_fraction", format_double(r.split.train_fraction));
  add("split_seed", std::to_string(r.split.seed));
  add("stratify_by", std::string(stratify_name(r.split.stratify_by)));
  add("resubstitution", r.split.resubstitution ? "true" : "false");
  add("train_size", std::to_string(r.train_size));
  add("test_size", std::to_string(r.test_size));
  add("dataset_fingerprint", r.dataset_fingerprint);
  add("nonconverged_pairs", std::to_string(r.nonconverged_pairs));
  add("accuracy", format_double(r.confusion.accuracy()));
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    add("per_class." + std::string(label_name(label_at(k))),
        format_double(r.confusion.class_accuracy(label_at(k))));
  }
  for (std::size_t t = 0; t < kLabelCount; ++t) {
    for (std::size_t p = 0; p < kLabelCount; ++p) {
      add("counts." + std::string(label_name(label_at(t))) + "." + std::string(label_name(label_at(p))),
          std::to_string(r.confusion.counts()[t][p]));
    }
  }
  add("timings_ms.extract", format_double(r.timings.extract_ms));
  add("timings_ms.train", format_double(r.timings.train_ms));
  add("timings_ms.predict", format_double(r.timings.predict_ms));
  return f;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "csv", {}, std::nullopt, "unterminated quote");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T parse_number(const std::string& s, const std::string& key) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "csv", key, std::nullopt, "bad number \"" + s + "\"");
  }
  return v;
}

std::string render_text(const EvaluationReport& r) {
  std::ostringstream out;
  const auto& cs = r.classifier;
  out << "classifier: " << classifier_name(cs.kind);
  if (is_svm(cs.kind)) {
    out << " (c=" << format_double(cs.c) << ", tol=" << format_double(cs.tol)
        << ", kernel_scale=" << format_double(cs.kernel_scale) << ", seed=" << cs.seed << ")";
  }
  out << "\nfeatures:   " << r.features.features_name()
      << " (angle_mode=" << r.features.angle_mode_name() << ", dimension=" << r.features.dimension()
      << ")\n";
  if (r.split.resubstitution) {
    out << "split:      RESUBSTITUTION (trained and tested on all " << r.train_size
        << " observations; not a generalization estimate)\n";
  } else {
    out << "split:      stratified by " << stratify_name(r.split.stratify_by)
        << ", train_fraction=" << format_double(r.split.train_fraction) << ", seed=" << r.split.seed
        << " (" << r.train_size << " train / " << r.test_size << " test)\n";
  }
  out << "dataset:    " << r.dataset_fingerprint << "\n";
  if (r.nonconverged_pairs > 0) {
    out << "warning:    " << r.nonconverged_pairs << " SVM pair(s) did not converge\n";
  }
  out << "\nRows: true class. Columns: predicted class.\n";
  constexpr std::size_t kLabelWidth = 11, kCellWidth = 10;
  out << pad_right("Postures", kLabelWidth);
  for (std::size_t k = 0; k < kLabelCount; ++k) out << pad_left(std::string(label_name(label_at(k))), kCellWidth);
  out << "\n";
  const auto& counts = r.confusion.counts();
  for (std::size_t t = 0; t < kLabelCount; ++t) {
    const auto total = r.confusion.row_total(label_at(t));
    out << pad_right(std::string(label_name(label_at(t))), kLabelWidth);
    for (std::size_t p = 0; p < kLabelCount; ++p) {
      out << pad_left(format_percent(counts[t][p], total), kCellWidth);
    }
    out << "\n";
  }
  out << "\noverall accuracy: " << format_percent(r.confusion.trace(), r.confusion.total()) << " ("
      << r.confusion.trace() << "/" << r.confusion.total() << ")\n";
  return out.str();
}

}  // namespace

std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Text: return render_text(report);
    case ReportFormat::Json: return report_to_json(report).dump(2) + "\n";
    case ReportFormat::Csv: {
      std::string out = "key,value\n";
      for (const auto& [k, v] : report_fields(report)) out += csv_field(k) + "," + csv_field(v) + "\n";
      return out;
    }
  }
  return {};
}

EvaluationReport parse_report_json(std::string_view text) {
  try {
    return report_from_json(json::parse(text.begin(), text.end()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "report", {}, std::nullopt, e.what());
  }
}

EvaluationReport parse_report_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != std::vector<std::string>{"key", "value"}) {
    throw Error(ErrorCode::ParseError, "csv", {}, std::nullopt, "expected a key,value header");
  }
  std::map<std::string, std::string> kv;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) {
      throw Error(ErrorCode::ParseError, "csv", {}, i + 1, "expected 2 columns");
    }
    kv[rows[i][0]] = rows[i][1];
  }
  auto get = [&kv](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::ParseError, "csv", key, std::nullopt, "missing key");
    return it->second;
  };
  if (get("version") != std::to_string(kReportVersion)) {
    throw Error(ErrorCode::VersionMismatch, "report", get("version"));
  }
  EvaluationReport r;
  r.classifier.kind = classifier_from_name(get("classifier"));
  r.classifier.c = parse_number<double>(get("c"), "c");
  r.classifier.tol = parse_number<double>(get("tol"), "tol");
  r.classifier.kernel_scale = parse_number<double>(get("kernel_scale"), "kernel_scale");
  r.classifier.max_passes = parse_number<int>(get("max_passes"), "max_passes");
  r.classifier.seed = parse_number<std::uint64_t>(get("classifier_seed"), "classifier_seed");
  r.features = FeatureConfig::parse(get("features"), get("angle_mode"));
  r.split.train_fraction = parse_number<double>(get("train_fraction"), "train_fraction");
  r.split.seed = parse_number<std::uint64_t>(get("split_seed"), "split_seed");
  r.split.stratify_by = stratify_from_name(get("stratify_by"));
  r.split.resubstitution = get("resubstitution") == "true";
  r.train_size = parse_number<std::size_t>(get("train_size"), "train_size");
  r.test_size = parse_number<std::size_t>(get("test_size"), "test_size");
  r.dataset_fingerprint = get("dataset_fingerprint");
  r.nonconverged_pairs = parse_number<std::size_t>(get("nonconverged_pairs"), "nonconverged_pairs");
  ConfusionMatrix::Counts counts{};
  for (std::size_t t = 0; t < kLabelCount; ++t) {
    for (std::size_t p = 0; p < kLabelCount; ++p) {
      const std::string key = "counts." + std::string(label_name(label_at(t))) + "." +
                              std::string(label_name(label_at(p)));
      counts[t][p] = parse_number<std::uint64_t>(get(key), key);
    }
  }
  r.confusion = ConfusionMatrix(counts);
  r.timings = {parse_number<double>(get("timings_ms.extract"), "timings_ms.extract"),
               parse_number<double>(get("timings_ms.train"), "timings_ms.train"),
               parse_number<double>(get("timings_ms.predict"), "timings_ms.predict")};
  return r;
}

std::string render_grid(std::span<const EvaluationReport> reports,
                        std::span<const ClassifierKind> classifiers,
                        std::span<const FeatureConfig> feature_sets, ReportFormat format) {
  const std::size_t cols = feature_sets.size();
  auto cell = [&](std::size_t r, std::size_t c) -> const EvaluationReport& {
    return reports[r * cols + c];
  };
  switch (format) {
    case ReportFormat::Text: {
      constexpr std::size_t kFirst = 24, kCell = 21;
      std::ostringstream out;
      out << pad_right("Classifier", kFirst);
      for (const auto& f : feature_sets) out << pad_left(display_name(f), kCell);
      out << "\n";
      for (std::size_t r = 0; r < classifiers.size(); ++r) {
        out << pad_right(display_name(classifiers[r]), kFirst);
        for (std::size_t c = 0; c < cols; ++c) {
          const auto& m = cell(r, c).confusion;
          out << pad_left(format_percent(m.trace(), m.total()), kCell);
        }
        out << "\n";
      }
      return out.str();
    }
    case ReportFormat::Csv: {
      std::string out = "classifier";
      for (const auto& f : feature_sets) out += "," + f.features_name();
      out += "\n";
      for (std::size_t r = 0; r < classifiers.size(); ++r) {
        out += std::string(classifier_name(classifiers[r]));
        for (std::size_t c = 0; c < cols; ++c) out += "," + format_double(cell(r, c).confusion.accuracy());
        out += "\n";
      }
      return out;
    }
    case ReportFormat::Json: {
      ordered_json j;
      j["version"] = kReportVersion;
      j["rows"] = ordered_json::array();
      for (std::size_t r = 0; r < classifiers.size(); ++r) {
        ordered_json row;
        row["classifier"] = std::string(classifier_name(classifiers[r]));
        row["cells"] = ordered_json::array();
        for (std::size_t c = 0; c < cols; ++c) {
          row["cells"].push_back({{"features", feature_sets[c].features_name()},
                                  {"accuracy", cell(r, c).confusion.accuracy()},
                                  {"report", report_to_json(cell(r, c))}});
        }
        j["rows"].push_back(std::move(row));
      }
      return j.dump(2) + "\n";
    }
  }
  return {};
}

}  // namespace posture
