#include "posture/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "posture/dataset.hpp"
#include "posture/error.hpp"
#include "posture/evaluation.hpp"
#include "posture/model_io.hpp"
#include "posture/synth.hpp"
#include "posture/util.hpp"

namespace posture::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a subcommand may read. Defaults are the library defaults except
// the seed, which is shared by the split, the SMO solver and the generator.
struct Options {
  std::string data, model, out, format = "text";
  std::string features = "combined", angle_mode = "adjacent";
  std::string classifier = "svm_quadratic";
  double c = 1.0, tol = 1e-3, kernel_scale = 1.0;
  int max_passes = ClassifierSpec{}.max_passes;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  std::string stratify = "label";
  bool resubstitution = false, allow_nonconverged = false;
  unsigned threads = 1;
  // synth
  std::size_t per_class = 208, participants = 13;
  std::string orientations = "0,90,180,270", distances = "1,2,3,4";
  double noise = 0.02, scale_min = 0.85, scale_max = 1.15;
};

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError(source + ": invalid seed \"" + text + "\"");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(std::string(flag) + ": invalid number \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

// A JSON config file becomes flags placed before the command-line flags, so
// the command line wins (options keep their last value).
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, path, {}, std::nullopt, "cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path, {}, std::nullopt, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, path, {}, std::nullopt, "config must be an object");
  std::vector<std::string> args;
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw UsageError("config files cannot include other config files");
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
      else args.push_back(flag + "=false");
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      args.push_back(flag);
      args.push_back(value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ",";
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      args.push_back(flag);
      args.push_back(joined);
    } else {
      throw UsageError("config key \"" + key + "\" has an unsupported value");
    }
  }
  return args;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, path, {}, std::nullopt, "cannot write file");
  file << content;
  if (!file) throw Error(ErrorCode::IoError, path, {}, std::nullopt, "write failed");
}

FeatureConfig feature_config(const Options& o) {
  FeatureConfig f = FeatureConfig::parse(o.features, o.angle_mode);
  f.validate();
  return f;
}

ClassifierSpec classifier_spec(const Options& o) {
  ClassifierSpec s;
  s.kind = classifier_from_name(o.classifier);
  s.c = o.c;
  s.tol = o.tol;
  s.kernel_scale = o.kernel_scale;
  s.max_passes = o.max_passes;
  s.seed = o.seed;
  s.validate();
  return s;
}

SplitSpec split_spec(const Options& o) {
  SplitSpec s;
  s.train_fraction = o.train_fraction;
  s.seed = o.seed;
  s.stratify_by = stratify_from_name(o.stratify);
  s.resubstitution = o.resubstitution;
  s.validate();
  return s;
}

void check_convergence(std::size_t nonconverged, const Options& o, std::ostream& err) {
  if (nonconverged == 0) return;
  if (!o.allow_nonconverged) {
    throw Error(ErrorCode::NonConvergence, "smo", std::to_string(nonconverged) + " pair(s)",
                std::nullopt, "raise --max-passes or pass --allow-nonconverged");
  }
  err << "warning: " << nonconverged << " SVM pair(s) did not converge\n";
}

// Common flag groups.
void add_feature_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--features", o.features, "Feature set")
      ->check(CLI::IsMember({"distances", "angles", "combined"}))
      ->capture_default_str();
  cmd->add_option("--angle-mode", o.angle_mode, "Angle family")
      ->check(CLI::IsMember({"adjacent", "all_triples"}))
      ->capture_default_str();
}

void add_hyper_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--c", o.c, "SVM box constraint C")->capture_default_str();
  cmd->add_option("--tol", o.tol, "SMO KKT tolerance")->capture_default_str();
  cmd->add_option("--kernel-scale", o.kernel_scale, "Polynomial kernel scale")->capture_default_str();
  cmd->add_option("--max-passes", o.max_passes, "SMO full-sweep limit")->capture_default_str();
  cmd->add_flag("--allow-nonconverged", o.allow_nonconverged,
                "Keep going when an SVM pair hits the sweep limit");
}

void add_classifier_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--classifier", o.classifier, "Classifier")
      ->check(CLI::IsMember({"lda", "qda", "knn1", "svm_linear", "svm_quadratic", "svm_cubic"}))
      ->capture_default_str();
  add_hyper_flags(cmd, o);
}

void add_split_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--train-fraction", o.train_fraction, "Training share of each stratum")
      ->capture_default_str();
  cmd->add_option("--stratify", o.stratify, "Split strata")
      ->check(CLI::IsMember({"label", "label_participant"}))
      ->capture_default_str();
  cmd->add_flag("--resubstitution", o.resubstitution,
                "Train and test on the whole dataset (oracle checks only)");
}

void add_format_flag(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
}

std::string seed_help() {
  return std::string("Master seed (default from ") + kSeedEnv + ", else 42)";
}

void cmd_synth(const Options& o, std::ostream& out) {
  SynthSpec s;
  s.seed = o.seed;
  s.per_class = o.per_class;
  s.participants = o.participants;
  s.orientations_deg = parse_list(o.orientations, "--orientations");
  s.distances_m = parse_list(o.distances, "--distances");
  s.noise_stddev_m = o.noise;
  s.scale_min = o.scale_min;
  s.scale_max = o.scale_max;
  s.validate();
  write_output(o.out, serialize_dataset(synth_generate(s)), out);
}

void cmd_featurize(const Options& o, std::ostream& out, std::ostream& err) {
  const FeatureConfig cfg = feature_config(o);
  const LabeledDataset ds = load_dataset(o.data);
  std::string doc;
  ordered_json header;
  header["format"] = "posture-features";
  header["version"] = 1;
  header["features"] = cfg.features_name();
  header["angle_mode"] = cfg.angle_mode_name();
  header["fingerprint"] = cfg.fingerprint();
  header["dimension"] = cfg.dimension();
  header["dataset_fingerprint"] = ds.fingerprint();
  header["records"] = ds.size();
  doc += header.dump() + "\n";
  std::size_t degenerate = 0;
  for (const auto& obs : ds.records) {
    const FeatureVector fv = extract(obs.skeleton, cfg);
    degenerate += fv.degenerate_angles;
    ordered_json rec;
    rec["participant"] = obs.meta.participant_id;
    if (obs.label) rec["label"] = std::string(label_name(*obs.label));
    rec["degenerate_angles"] = fv.degenerate_angles;
    rec["values"] = fv.values;
    doc += rec.dump() + "\n";
  }
  if (degenerate > 0) err << "warning: " << degenerate << " degenerate angle(s) emitted as 0\n";
  write_output(o.out, doc, out);
}

void cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const FeatureConfig cfg = feature_config(o);
  const ClassifierSpec spec = classifier_spec(o);
  const LabeledDataset ds = load_dataset(o.data);
  Samples x;
  std::vector<PostureLabel> y;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.records[i].label) {
      throw Error(ErrorCode::ParseError, o.data, {}, i + 2, "training records need a label");
    }
    x.push_back(extract(ds.records[i].skeleton, cfg).values);
    y.push_back(*ds.records[i].label);
  }
  ModelFile file;
  file.model = train_classifier(x, y, cfg.fingerprint(), spec);
  file.features = cfg;
  file.dataset_fingerprint = ds.fingerprint();
  check_convergence(file.model.nonconverged_pairs, o, err);
  write_output(o.out, serialize_model(file), out);
}

void cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const FeatureConfig cfg = feature_config(o);
  const ClassifierSpec spec = classifier_spec(o);
  const SplitSpec split = split_spec(o);
  const ReportFormat format = report_format_from_name(o.format);
  const LabeledDataset ds = load_dataset(o.data);
  const EvaluationReport report = evaluate(ds, cfg, spec, split);
  check_convergence(report.nonconverged_pairs, o, err);
  if (split.resubstitution) err << "warning: resubstitution accuracy is not a generalization estimate\n";
  write_output(o.out, render_report(report, format), out);
}

void cmd_predict(const Options& o, std::ostream& out) {
  const ReportFormat format = report_format_from_name(o.format);
  const ModelFile file = load_model(o.model);
  const LabeledDataset ds = load_dataset(o.data);
  std::vector<Prediction> preds;
  preds.reserve(ds.size());
  for (const auto& obs : ds.records) preds.push_back(predict(file.model, extract(obs.skeleton, file.features)));

  const auto& spec = file.model.spec;
  std::string doc;
  if (format == ReportFormat::Json) {
    ordered_json j;
    j["version"] = 1;
    j["classifier"] = std::string(classifier_name(spec.kind));
    j["features"] = file.features.features_name();
    j["angle_mode"] = file.features.angle_mode_name();
    j["model_dataset_fingerprint"] = file.dataset_fingerprint;
    j["dataset_fingerprint"] = ds.fingerprint();
    j["predictions"] = ordered_json::array();
    for (std::size_t i = 0; i < preds.size(); ++i) {
      ordered_json p;
      p["record"] = i + 1;
      p["participant"] = ds.records[i].meta.participant_id;
      if (ds.records[i].label) p["truth"] = std::string(label_name(*ds.records[i].label));
      p["label"] = std::string(label_name(preds[i].label));
      if (is_svm(spec.kind)) p["votes"] = preds[i].votes;
      p["scores"] = preds[i].scores;
      j["predictions"].push_back(std::move(p));
    }
    doc = j.dump(2) + "\n";
  } else if (format == ReportFormat::Csv) {
    doc = "record,participant,truth,label\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto& r = ds.records[i];
      doc += std::to_string(i + 1) + "," + r.meta.participant_id + "," +
             (r.label ? std::string(label_name(*r.label)) : "") + "," +
             std::string(label_name(preds[i].label)) + "\n";
    }
  } else {
    doc = "classifier: " + std::string(classifier_name(spec.kind)) + "\nfeatures:   " +
          file.features.features_name() + " (angle_mode=" + file.features.angle_mode_name() + ")\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
      doc += std::to_string(i + 1) + "\t" + std::string(label_name(preds[i].label)) + "\n";
    }
  }
  write_output(o.out, doc, out);
}

void cmd_grid(const Options& o, std::ostream& out, std::ostream& err) {
  Options base_opts = o;
  base_opts.classifier = "svm_quadratic";
  const ClassifierSpec base = classifier_spec(base_opts);
  const SplitSpec split = split_spec(o);
  const ReportFormat format = report_format_from_name(o.format);
  const AngleMode mode = FeatureConfig::parse("combined", o.angle_mode).angle_mode;
  const LabeledDataset ds = load_dataset(o.data);
  const auto classifiers = grid_classifiers();
  const auto feature_sets = grid_feature_sets(mode);
  const auto reports = evaluate_grid(ds, classifiers, feature_sets, base, split, o.threads);
  std::size_t nonconverged = 0;
  for (const auto& r : reports) nonconverged += r.nonconverged_pairs;
  check_convergence(nonconverged, o, err);
  write_output(o.out, render_grid(reports, classifiers, feature_sets, format), out);
}

int exit_code_for(const Error& e) {
  if (is_numeric_failure(e.code())) return kNumericFailure;
  if (e.code() == ErrorCode::InvalidConfig) return kUsageError;
  return kDataError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  try {
    if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
      o.seed = parse_seed(env, kSeedEnv);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  CLI::App app{"Skeleton posture recognition: synthesis, features, training, evaluation"};
  app.name("posture");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON file of flag values; command-line flags win");
    cmd->add_option("--seed", o.seed, seed_help())->capture_default_str();
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  add_common(synth);
  synth->add_option("--out", o.out, "Dataset file (stdout when omitted)");
  synth->add_option("--per-class", o.per_class, "Records per class")->capture_default_str();
  synth->add_option("--participants", o.participants, "Simulated participants")->capture_default_str();
  synth->add_option("--orientations", o.orientations, "Comma-separated orientations in degrees")
      ->capture_default_str();
  synth->add_option("--distances", o.distances, "Comma-separated camera distances in meters")
      ->capture_default_str();
  synth->add_option("--noise", o.noise, "Joint noise stddev in meters")->capture_default_str();
  synth->add_option("--scale-min", o.scale_min, "Smallest participant scale")->capture_default_str();
  synth->add_option("--scale-max", o.scale_max, "Largest participant scale")->capture_default_str();

  CLI::App* featurize = app.add_subcommand("featurize", "Extract feature vectors from a dataset");
  add_common(featurize);
  featurize->add_option("--data", o.data, "Dataset file")->required();
  featurize->add_option("--out", o.out, "Feature file (stdout when omitted)");
  add_feature_flags(featurize, o);

  CLI::App* train = app.add_subcommand("train", "Train a classifier on every record and save it");
  add_common(train);
  train->add_option("--data", o.data, "Dataset file")->required();
  train->add_option("--out", o.out, "Model file")->required();
  add_feature_flags(train, o);
  add_classifier_flags(train, o);

  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Train/test split evaluation report");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--data", o.data, "Dataset file")->required();
  evaluate_cmd->add_option("--out", o.out, "Report file (stdout when omitted)");
  add_feature_flags(evaluate_cmd, o);
  add_classifier_flags(evaluate_cmd, o);
  add_split_flags(evaluate_cmd, o);
  add_format_flag(evaluate_cmd, o);

  CLI::App* predict_cmd = app.add_subcommand("predict", "Label records with a saved model");
  predict_cmd->add_option("--config", config_path, "JSON file of flag values; command-line flags win");
  predict_cmd->add_option("--model", o.model, "Model file")->required();
  predict_cmd->add_option("--data", o.data, "Dataset file (labels optional)")->required();
  predict_cmd->add_option("--out", o.out, "Prediction file (stdout when omitted)");
  add_format_flag(predict_cmd, o);

  CLI::App* grid = app.add_subcommand("grid", "Accuracy of every classifier on every feature set");
  add_common(grid);
  grid->add_option("--data", o.data, "Dataset file")->required();
  grid->add_option("--out", o.out, "Grid file (stdout when omitted)");
  grid->add_option("--angle-mode", o.angle_mode, "Angle family")
      ->check(CLI::IsMember({"adjacent", "all_triples"}))
      ->capture_default_str();
  add_hyper_flags(grid, o);
  add_split_flags(grid, o);
  add_format_flag(grid, o);
  grid->add_option("--threads", o.threads, "Worker threads for grid cells")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    // Splice config-file flags in right after the subcommand name.
    std::vector<std::string> effective = args;
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      else continue;
      const auto extra = config_args(path);
      effective.insert(effective.begin() + 1, extra.begin(), extra.end());
      break;
    }
    app.parse(std::vector<std::string>(effective.rbegin(), effective.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    if (synth->parsed()) cmd_synth(o, out);
    else if (featurize->parsed()) cmd_featurize(o, out, err);
    else if (train->parsed()) cmd_train(o, out, err);
    else if (evaluate_cmd->parsed()) cmd_evaluate(o, out, err);
    else if (predict_cmd->parsed()) cmd_predict(o, out);
    else if (grid->parsed()) cmd_grid(o, out, err);
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace posture::cli
