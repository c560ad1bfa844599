// Gaussian discriminant classifiers (pooled and per-class covariance).

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>

#include "posture/classifier.hpp"
#include "posture/error.hpp"

namespace posture {

namespace {

struct ClassGroups {
  std::vector<PostureLabel> classes;
  std::vector<std::vector<std::size_t>> rows;
};

ClassGroups group_by_class(const Samples& x, std::span<const PostureLabel> y) {
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet);
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "labels");
  std::array<std::vector<std::size_t>, kLabelCount> members;
  for (std::size_t i = 0; i < y.size(); ++i) members[index(y[i])].push_back(i);
  ClassGroups g;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    if (members[k].empty()) continue;
    if (members[k].size() < 2) {
      throw Error(ErrorCode::SingleClass, std::string(label_name(label_at(k))), {}, std::nullopt,
                  "each class needs at least 2 samples for a covariance estimate");
    }
    g.classes.push_back(label_at(k));
    g.rows.push_back(std::move(members[k]));
  }
  if (g.classes.size() < 2) throw Error(ErrorCode::SingleClass);
  return g;
}

Eigen::VectorXd class_mean(const Samples& z, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(z.front().size()));
  for (std::size_t r : rows) mean += Eigen::Map<const Eigen::VectorXd>(z[r].data(), mean.size());
  return mean / static_cast<double>(rows.size());
}

// Scatter of `rows` around `mean`, accumulated into `scatter`.
void add_scatter(const Samples& z, const std::vector<std::size_t>& rows,
                 const Eigen::VectorXd& mean, Eigen::MatrixXd& scatter) {
  const auto d = mean.size();
  Eigen::MatrixXd centered(d, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    centered.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(z[rows[c]].data(), d) - mean;
  }
  scatter.selfadjointView<Eigen::Lower>().rankUpdate(centered);
}

// Ridge-regularizes and factorizes a covariance. Throws DegenerateCovariance.
Eigen::LLT<Eigen::MatrixXd> factorize(Eigen::MatrixXd cov, const std::string& what) {
  cov = cov.selfadjointView<Eigen::Lower>();
  const double d = static_cast<double>(cov.rows());
  const double ridge = kCovarianceRidge * cov.trace() / d;
  if (!(ridge > 0.0) || !std::isfinite(ridge)) {
    throw Error(ErrorCode::DegenerateCovariance, what, {}, std::nullopt, "zero total variance");
  }
  cov.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateCovariance, what, {}, std::nullopt,
                "covariance not positive definite after regularization");
  }
  return llt;
}

std::vector<double> to_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out.data(), m.rows(), m.cols()) = m;
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

MulticlassModel lda_train(const Samples& x, std::span<const PostureLabel> y,
                          std::string feature_fingerprint, const ClassifierSpec& spec) {
  const ClassGroups groups = group_by_class(x, y);
  MulticlassModel model;
  model.spec = spec;
  model.spec.kind = ClassifierKind::Lda;
  model.feature_fingerprint = std::move(feature_fingerprint);
  model.standardizer = Standardizer::fit(x);
  const Samples z = model.standardizer.apply_all(x);
  const auto d = static_cast<Eigen::Index>(z.front().size());

  LdaParams p;
  p.classes = groups.classes;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  std::vector<Eigen::VectorXd> means;
  for (const auto& rows : groups.rows) {
    means.push_back(class_mean(z, rows));
    add_scatter(z, rows, means.back(), scatter);
    p.priors.push_back(static_cast<double>(rows.size()) / static_cast<double>(z.size()));
  }
  const double dof = static_cast<double>(z.size() - groups.classes.size());
  const auto llt = factorize(scatter / dof, "pooled");
  const Eigen::MatrixXd inverse = llt.solve(Eigen::MatrixXd::Identity(d, d));
  p.pooled_inverse_cov = to_row_major(inverse);
  for (std::size_t k = 0; k < means.size(); ++k) {
    const Eigen::VectorXd w = llt.solve(means[k]);
    p.means.push_back(to_std(means[k]));
    p.weights.push_back(to_std(w));
    p.offsets.push_back(-0.5 * means[k].dot(w) + std::log(p.priors[k]));
  }
  model.params = std::move(p);
  return model;
}

MulticlassModel qda_train(const Samples& x, std::span<const PostureLabel> y,
                          std::string feature_fingerprint, const ClassifierSpec& spec) {
  const ClassGroups groups = group_by_class(x, y);
  MulticlassModel model;
  model.spec = spec;
  model.spec.kind = ClassifierKind::Qda;
  model.feature_fingerprint = std::move(feature_fingerprint);
  model.standardizer = Standardizer::fit(x);
  const Samples z = model.standardizer.apply_all(x);
  const auto d = static_cast<Eigen::Index>(z.front().size());

  QdaParams p;
  p.classes = groups.classes;
  for (std::size_t k = 0; k < groups.rows.size(); ++k) {
    const auto& rows = groups.rows[k];
    const Eigen::VectorXd mean = class_mean(z, rows);
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    add_scatter(z, rows, mean, scatter);
    const auto llt = factorize(scatter / static_cast<double>(rows.size() - 1),
                               std::string(label_name(groups.classes[k])));
    const Eigen::MatrixXd l = llt.matrixL();
    p.means.push_back(to_std(mean));
    p.inverse_covs.push_back(to_row_major(llt.solve(Eigen::MatrixXd::Identity(d, d))));
    p.log_dets.push_back(2.0 * l.diagonal().array().log().sum());
    p.priors.push_back(static_cast<double>(rows.size()) / static_cast<double>(z.size()));
  }
  model.params = std::move(p);
  return model;
}

}  // namespace posture
