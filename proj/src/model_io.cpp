#include "posture/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "posture/error.hpp"

namespace posture {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

ordered_json labels_to_json(const std::vector<PostureLabel>& labels) {
  ordered_json out = ordered_json::array();
  for (PostureLabel l : labels) out.push_back(std::string(label_name(l)));
  return out;
}

std::vector<PostureLabel> labels_from_json(const json& j) {
  std::vector<PostureLabel> out;
  for (const auto& item : j) {
    const auto label = label_from_name(item.get<std::string>());
    if (!label) throw Error(ErrorCode::CorruptModel, "label", item.get<std::string>());
    out.push_back(*label);
  }
  return out;
}

ordered_json kernel_to_json(const KernelSpec& k) {
  ordered_json out;
  out["kind"] = k.kind == KernelSpec::Kind::Linear ? "linear" : "polynomial";
  out["degree"] = k.degree;
  out["scale"] = k.scale;
  return out;
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    k.kind = KernelSpec::Kind::Linear;
  } else if (kind == "polynomial") {
    k.kind = KernelSpec::Kind::Polynomial;
  } else {
    throw Error(ErrorCode::CorruptModel, "kernel", kind);
  }
  k.degree = j.at("degree").get<int>();
  k.scale = j.at("scale").get<double>();
  k.validate();
  return k;
}

ordered_json params_to_json(const MulticlassModel& m) {
  return std::visit(
      [](const auto& p) -> ordered_json {
        using T = std::decay_t<decltype(p)>;
        ordered_json out;
        if constexpr (std::is_same_v<T, OvoSvmParams>) {
          out["pairs"] = ordered_json::array();
          for (const auto& pair : p.pairs) {
            ordered_json e;
            e["positive"] = std::string(label_name(pair.positive));
            e["negative"] = std::string(label_name(pair.negative));
            e["kernel"] = kernel_to_json(pair.svm.kernel);
            e["c"] = pair.svm.c;
            e["bias"] = pair.svm.bias;
            e["converged"] = pair.svm.converged;
            e["dual_coef"] = pair.svm.dual_coef;
            e["support_vectors"] = pair.svm.support_vectors;
            out["pairs"].push_back(std::move(e));
          }
        } else if constexpr (std::is_same_v<T, LdaParams>) {
          out["classes"] = labels_to_json(p.classes);
          out["means"] = p.means;
          out["pooled_inverse_cov"] = p.pooled_inverse_cov;
          out["weights"] = p.weights;
          out["offsets"] = p.offsets;
          out["priors"] = p.priors;
        } else if constexpr (std::is_same_v<T, QdaParams>) {
          out["classes"] = labels_to_json(p.classes);
          out["means"] = p.means;
          out["inverse_covs"] = p.inverse_covs;
          out["log_dets"] = p.log_dets;
          out["priors"] = p.priors;
        } else {
          out["points"] = p.points;
          out["labels"] = labels_to_json(p.labels);
        }
        return out;
      },
      m.params);
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::CorruptModel, what, {}, std::nullopt, "inconsistent sizes");
}

void check_rows(const Samples& rows, std::size_t count, std::size_t d, const char* what) {
  require(rows.size() == count, what);
  for (const auto& r : rows) require(r.size() == d, what);
}

void parse_params(const json& j, MulticlassModel& m) {
  const std::size_t d = m.standardizer.dimension();
  switch (m.spec.kind) {
    case ClassifierKind::SvmLinear:
    case ClassifierKind::SvmQuadratic:
    case ClassifierKind::SvmCubic: {
      OvoSvmParams p;
      for (const auto& e : j.at("pairs")) {
        PairwiseSvm pair;
        const auto pos = label_from_name(e.at("positive").get<std::string>());
        const auto neg = label_from_name(e.at("negative").get<std::string>());
        require(pos && neg, "pair labels");
        pair.positive = *pos;
        pair.negative = *neg;
        pair.svm.kernel = kernel_from_json(e.at("kernel"));
        pair.svm.c = e.at("c").get<double>();
        pair.svm.bias = e.at("bias").get<double>();
        pair.svm.converged = e.at("converged").get<bool>();
        pair.svm.dual_coef = e.at("dual_coef").get<std::vector<double>>();
        pair.svm.support_vectors = e.at("support_vectors").get<Samples>();
        check_rows(pair.svm.support_vectors, pair.svm.dual_coef.size(), d, "support_vectors");
        p.pairs.push_back(std::move(pair));
      }
      require(!p.pairs.empty(), "pairs");
      m.params = std::move(p);
      break;
    }
    case ClassifierKind::Lda: {
      LdaParams p;
      p.classes = labels_from_json(j.at("classes"));
      const std::size_t k = p.classes.size();
      p.means = j.at("means").get<Samples>();
      p.pooled_inverse_cov = j.at("pooled_inverse_cov").get<std::vector<double>>();
      p.weights = j.at("weights").get<Samples>();
      p.offsets = j.at("offsets").get<std::vector<double>>();
      p.priors = j.at("priors").get<std::vector<double>>();
      check_rows(p.means, k, d, "means");
      check_rows(p.weights, k, d, "weights");
      require(p.pooled_inverse_cov.size() == d * d, "pooled_inverse_cov");
      require(p.offsets.size() == k && p.priors.size() == k && k > 0, "offsets");
      m.params = std::move(p);
      break;
    }
    case ClassifierKind::Qda: {
      QdaParams p;
      p.classes = labels_from_json(j.at("classes"));
      const std::size_t k = p.classes.size();
      p.means = j.at("means").get<Samples>();
      p.inverse_covs = j.at("inverse_covs").get<Samples>();
      p.log_dets = j.at("log_dets").get<std::vector<double>>();
      p.priors = j.at("priors").get<std::vector<double>>();
      check_rows(p.means, k, d, "means");
      check_rows(p.inverse_covs, k, d * d, "inverse_covs");
      require(p.log_dets.size() == k && p.priors.size() == k && k > 0, "log_dets");
      m.params = std::move(p);
      break;
    }
    case ClassifierKind::Knn1: {
      Knn1Params p;
      p.points = j.at("points").get<Samples>();
      p.labels = labels_from_json(j.at("labels"));
      require(!p.labels.empty(), "labels");
      check_rows(p.points, p.labels.size(), d, "points");
      m.params = std::move(p);
      break;
    }
  }
}

}  // namespace

std::string serialize_model(const ModelFile& file) {
  const MulticlassModel& m = file.model;
  ordered_json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;

  ordered_json classifier;
  classifier["name"] = std::string(classifier_name(m.spec.kind));
  classifier["c"] = m.spec.c;
  classifier["tol"] = m.spec.tol;
  classifier["kernel_scale"] = m.spec.kernel_scale;
  classifier["max_passes"] = m.spec.max_passes;
  classifier["seed"] = m.spec.seed;
  j["classifier"] = std::move(classifier);

  ordered_json features;
  features["set"] = file.features.features_name();
  features["angle_mode"] = file.features.angle_mode_name();
  features["fingerprint"] = m.feature_fingerprint;
  j["features"] = std::move(features);

  j["dataset_fingerprint"] = file.dataset_fingerprint;
  j["nonconverged_pairs"] = m.nonconverged_pairs;
  j["standardizer"] = {{"mean", m.standardizer.mean()}, {"stddev", m.standardizer.stddev()}};
  j["params"] = params_to_json(m);
  return j.dump() + "\n";
}

ModelFile parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptModel, "model", {}, std::nullopt, e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kModelFormatName) {
      throw Error(ErrorCode::CorruptModel, "format", {}, std::nullopt, "not a model file");
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "model", std::to_string(version), std::nullopt,
                  "reader supports version " + std::to_string(kModelFormatVersion));
    }
    ModelFile file;
    MulticlassModel& m = file.model;
    const json& c = j.at("classifier");
    m.spec.kind = classifier_from_name(c.at("name").get<std::string>());
    m.spec.c = c.at("c").get<double>();
    m.spec.tol = c.at("tol").get<double>();
    m.spec.kernel_scale = c.at("kernel_scale").get<double>();
    m.spec.max_passes = c.at("max_passes").get<int>();
    m.spec.seed = c.at("seed").get<std::uint64_t>();

    const json& f = j.at("features");
    file.features = FeatureConfig::parse(f.at("set").get<std::string>(),
                                         f.at("angle_mode").get<std::string>());
    m.feature_fingerprint = f.at("fingerprint").get<std::string>();
    if (m.feature_fingerprint != file.features.fingerprint()) {
      throw Error(ErrorCode::CorruptModel, "features", {}, std::nullopt,
                  "fingerprint does not match the feature configuration");
    }
    file.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    m.nonconverged_pairs = j.at("nonconverged_pairs").get<std::size_t>();
    m.standardizer = Standardizer(j.at("standardizer").at("mean").get<std::vector<double>>(),
                                  j.at("standardizer").at("stddev").get<std::vector<double>>());
    if (m.standardizer.dimension() != file.features.dimension()) {
      throw Error(ErrorCode::CorruptModel, "standardizer", {}, std::nullopt,
                  "dimension does not match the feature configuration");
    }
    parse_params(j.at("params"), m);
    return file;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptModel, "model", {}, std::nullopt, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptModel) throw;
    throw Error(ErrorCode::CorruptModel, "model", {}, std::nullopt, e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, path.string(), {}, std::nullopt, "cannot write file");
  out << serialize_model(file);
  if (!out) throw Error(ErrorCode::IoError, path.string(), {}, std::nullopt, "write failed");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path.string(), {}, std::nullopt, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace posture
