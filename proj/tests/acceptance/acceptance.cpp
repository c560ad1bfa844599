// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "posture/classifier.hpp"
#include "posture/cli.hpp"
#include "posture/dataset.hpp"
#include "posture/evaluation.hpp"
#include "posture/features.hpp"
#include "posture/model_io.hpp"
#include "posture/svm.hpp"
#include "posture/synth.hpp"
#include "support.hpp"

using namespace posture;
using testsupport::relative_gap;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

// Exceptions inside a criterion count as its failure, not a crash.
void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("threw: ") + e.what());
  }
}

// --- independent oracles -------------------------------------------------

PostureLabel oracle_vote(const std::vector<PairDecision>& table) {
  int votes[kLabelCount] = {};
  double margin[kLabelCount] = {};
  bool present[kLabelCount] = {};
  for (const auto& d : table) {
    const auto p = index(d.positive), n = index(d.negative);
    present[p] = present[n] = true;
    ++votes[d.value > 0 ? p : n];
    margin[p] += d.value;
    margin[n] -= d.value;
  }
  std::size_t best = kLabelCount;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    if (!present[k]) continue;
    if (best == kLabelCount || votes[k] > votes[best] ||
        (votes[k] == votes[best] && margin[k] > margin[best])) {
      best = k;
    }
  }
  return label_at(best);
}

ConfusionMatrix::Counts oracle_tally(const std::vector<PostureLabel>& t,
                                     const std::vector<PostureLabel>& p) {
  ConfusionMatrix::Counts c{};
  for (std::size_t i = 0; i < t.size(); ++i) ++c[index(t[i])][index(p[i])];
  return c;
}

double oracle_angle(const Point3& a, const Point3& v, const Point3& c) {
  const Point3 u = a - v, w = c - v;
  return std::acos(std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0));
}

// --- criteria ------------------------------------------------------------

double accuracy_of(const LabeledDataset& ds, ClassifierKind kind, const char* features) {
  ClassifierSpec spec;
  spec.kind = kind;
  spec.seed = 42;
  SplitSpec split;
  split.seed = 42;
  return evaluate(ds, FeatureConfig::parse(features, "adjacent"), spec, split).confusion.accuracy();
}

void synthetic_benchmark() {
  criterion("synthetic benchmark", [] {
    const auto t0 = Clock::now();
    const auto ds = synth_generate(SynthSpec{});
    ClassifierSpec spec;
    spec.seed = 42;
    const auto r = evaluate(ds, FeatureConfig::parse("combined", "adjacent"), spec, SplitSpec{});
    const double secs = seconds_since(t0);
    const double acc = r.confusion.accuracy();
    report("synthetic benchmark", acc >= 0.90 && secs <= 60.0 && r.train_size == 832 && r.test_size == 208,
           fmt("quadratic SVM, combined: %.2f%% test accuracy (>= 90%%), %.2f s (<= 60 s), split %.0f/%.0f",
               100 * acc, secs, double(r.train_size), double(r.test_size)));
  });
}

void trend_check() {
  criterion("trend at noise 0.06", [] {
    SynthSpec s;
    s.noise_stddev_m = 0.06;
    const auto ds = synth_generate(s);
    const double quad = accuracy_of(ds, ClassifierKind::SvmQuadratic, "combined");
    const double lda = accuracy_of(ds, ClassifierKind::Lda, "combined");
    const double quad_dist = accuracy_of(ds, ClassifierKind::SvmQuadratic, "distances");
    const bool a = quad >= lda;
    const bool b = quad >= quad_dist - 0.02;
    report("trend: quadratic SVM >= LDA (combined)", a,
           fmt("quadratic SVM %.2f%% vs LDA %.2f%%", 100 * quad, 100 * lda));
    report("trend: combined >= distances - 2pp (quadratic SVM)", b,
           fmt("combined %.2f%% vs distances %.2f%%", 100 * quad, 100 * quad_dist));
  });
}

void invariance_suite() {
  criterion("geometric invariance", [] {
    const auto t0 = Clock::now();
    Rng rng(20240501);
    const FeatureConfig adjacent = FeatureConfig::parse("combined", "adjacent");
    const FeatureConfig triples = FeatureConfig::parse("angles", "all_triples");
    double worst_dist = 0, worst_angle = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto s = testsupport::random_skeleton(rng);
      const auto moved = testsupport::transform(
          s, testsupport::random_rotation(rng),
          Point3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)), rng.uniform(0.5, 2.0));
      const auto a = extract(s, adjacent).values, b = extract(moved, adjacent).values;
      for (std::size_t k = 0; k < kDistanceCount; ++k) {
        worst_dist = std::max(worst_dist, relative_gap(a[k], b[k]));
      }
      for (std::size_t k = kDistanceCount; k < a.size(); ++k) {
        worst_angle = std::max(worst_angle, std::abs(a[k] - b[k]));
      }
      const auto ta = extract(s, triples).values, tb = extract(moved, triples).values;
      for (std::size_t k = 0; k < ta.size(); ++k) {
        worst_angle = std::max(worst_angle, std::abs(ta[k] - tb[k]));
      }
    }
    const double secs = seconds_since(t0);
    report("geometric invariance", worst_dist < 1e-9 && worst_angle < 1e-9 && secs <= 5.0,
           fmt("1000 skeletons: max distance deviation %.2e (relative), max angle deviation %.2e "
               "(< 1e-9), %.2f s (<= 5 s)",
               worst_dist, worst_angle, secs));
  });
}

void smo_correctness() {
  criterion("SMO correctness", [] {
    Rng rng(777);
    const KernelSpec kernels[] = {KernelSpec::linear(), KernelSpec::polynomial(2, 1.0),
                                  KernelSpec::polynomial(3, 1.0)};
    std::size_t converged = 0, kkt_bad = 0, feas_bad = 0, monotone_bad = 0;
    double worst_balance = 0, worst_drop = 0;
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 10 + rng.below(191), d = 1 + rng.below(20);
      const double shift = rng.uniform(0.0, 1.5);
      Samples x(n, std::vector<double>(d));
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = i < 2 ? (i == 0 ? 1 : -1) : (rng.below(2) ? 1 : -1);
        for (auto& v : x[i]) v = rng.normal() + shift * y[i];
      }
      SmoOptions opt;
      opt.c = std::pow(10.0, rng.uniform(-1.0, 1.0));
      opt.tol = 1e-3;
      opt.seed = static_cast<std::uint64_t>(t);
      opt.record_objective = true;
      const KernelSpec& k = kernels[t % 3];
      const auto r = smo_train(x, y, k, opt);

      double balance = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(r.alpha[i] >= 0.0 && r.alpha[i] <= opt.c)) ++feas_bad;
        balance += r.alpha[i] * y[i];
      }
      worst_balance = std::max(worst_balance, std::abs(balance));
      if (std::abs(balance) > 1e-8) ++feas_bad;

      for (std::size_t u = 1; u < r.objective_trace.size(); ++u) {
        const double drop = r.objective_trace[u - 1] - r.objective_trace[u];
        if (drop > 0) {
          worst_drop = std::max(worst_drop, drop / std::max(1.0, std::abs(r.objective_trace[u - 1])));
          ++monotone_bad;
        }
      }
      if (r.model.converged) {
        ++converged;
        if (count_kkt_violations(x, y, r.alpha, r.model.bias, k, opt.c, opt.tol) != 0) ++kkt_bad;
      }
    }

    const Samples xor_x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    const std::vector<int> xor_y{-1, -1, 1, 1};
    SmoOptions xo;
    xo.c = 10;
    const auto quad = smo_train(xor_x, xor_y, KernelSpec::polynomial(2, 1.0), xo);
    std::size_t xor_errors = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      if ((svm_decision(quad.model, xor_x[i]) > 0 ? 1 : -1) != xor_y[i]) ++xor_errors;
    }

    report("SMO correctness", kkt_bad == 0 && feas_bad == 0 && monotone_bad == 0 && xor_errors == 0,
           fmt("50 problems, %.0f converged, %.0f with KKT violations, max |sum a*y| %.1e, "
               "largest relative objective dip %.1e",
               double(converged), double(kkt_bad), worst_balance, worst_drop) +
               fmt(", feasibility breaches %.0f, XOR quadratic errors %.0f", double(feas_bad),
                   double(xor_errors)));
  });
}

void oracle_equivalences() {
  criterion("oracle equivalences", [] {
    Rng rng(4242);

    std::size_t vote_mismatch = 0;
    for (int t = 0; t < 500; ++t) {
      std::vector<PairDecision> table;
      const bool coarse = t % 2 == 0;  // small integer values make ties common
      for (std::size_t a = 0; a < kLabelCount; ++a) {
        for (std::size_t b = a + 1; b < kLabelCount; ++b) {
          const double v = coarse ? double(int(rng.below(5)) - 2) : rng.normal();
          table.push_back({label_at(a), label_at(b), v});
        }
      }
      if (ovo_vote(table).label != oracle_vote(table)) ++vote_mismatch;
    }

    Samples pts(150, std::vector<double>(6));
    std::vector<PostureLabel> labels(150);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      labels[i] = label_at(rng.below(kLabelCount));
      for (auto& v : pts[i]) v = rng.normal();
    }
    const auto knn = knn1_train(pts, labels, "fp");
    const auto stdz = Standardizer::fit(pts);
    const auto zpts = stdz.apply_all(pts);
    std::size_t knn_mismatch = 0;
    for (int q = 0; q < 300; ++q) {
      std::vector<double> x(6);
      for (auto& v : x) v = rng.normal();
      const auto zx = stdz.apply_all(Samples{x})[0];
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < zpts.size(); ++i) {
        double d = 0;
        for (std::size_t k = 0; k < 6; ++k) d += (zpts[i][k] - zx[k]) * (zpts[i][k] - zx[k]);
        if (d < best_d) best_d = d, best = i;
      }
      if (knn1_predict(knn, FeatureVector{x, "fp", 0}) != labels[best]) ++knn_mismatch;
    }

    std::size_t tally_mismatch = 0;
    for (int t = 0; t < 500; ++t) {
      const std::size_t n = 1 + rng.below(300);
      std::vector<PostureLabel> truth(n), pred(n);
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = label_at(rng.below(kLabelCount));
        pred[i] = label_at(rng.below(kLabelCount));
      }
      if (confusion_matrix(truth, pred).counts() != oracle_tally(truth, pred)) ++tally_mismatch;
    }

    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const auto s = testsupport::random_skeleton(rng, 0.2);
      const double norm = (s[JointId::SpineShoulder] - s[JointId::SpineMid]).norm();
      const auto got = pairwise_distances(s);
      std::size_t k = 0;
      for (std::size_t i = 0; i < kJointCount; ++i) {
        for (std::size_t j = i + 1; j < kJointCount; ++j) {
          const Point3 d = s.at(i) - s.at(j);
          const double want = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()) / norm;
          worst = std::max(worst, std::abs(got[k++] - want) / std::max(want, 1e-300));
        }
      }
    }

    // angle values themselves against an arccos formulation
    double worst_angle = 0;
    for (int t = 0; t < 100; ++t) {
      const auto s = testsupport::random_skeleton(rng, 0.2);
      const auto& topo = BoneTopology::kinect_v2();
      const auto got = angle_features(s, AngleMode::AdjacentSegments).values;
      std::size_t k = 0;
      for (std::size_t v = 0; v < kJointCount; ++v) {
        for (const auto& [a, c] : bone_pairs_at_joint(topo, joint_at(v))) {
          worst_angle = std::max(worst_angle, std::abs(got[k++] - oracle_angle(s[a], s.at(v), s[c])));
        }
      }
    }

    report("oracle: one-vs-one vote", vote_mismatch == 0,
           fmt("%.0f mismatches in 500 decision tables", double(vote_mismatch)));
    report("oracle: 1-NN", knn_mismatch == 0,
           fmt("%.0f mismatches in 300 queries", double(knn_mismatch)));
    report("oracle: confusion matrix", tally_mismatch == 0,
           fmt("%.0f mismatches in 500 label sequences", double(tally_mismatch)));
    report("oracle: pairwise distances", worst <= 1e-12,
           fmt("100 skeletons, max relative deviation %.2e (<= 1e-12)", worst));
    report("oracle: adjacent angles", worst_angle <= 1e-7,
           fmt("100 skeletons, max deviation from arccos form %.2e rad (<= 1e-7)", worst_angle));
  });
}

std::string cli_output(std::vector<std::string> args, int& code) {
  std::ostringstream out, err;
  code = cli::run(args, out, err);
  return out.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  criterion("determinism", [] {
    testsupport::TempDir dir;
    bool same = true;
    std::string detail;
    int code = 0;

    const auto d1 = (dir / "a.jsonl").string(), d2 = (dir / "b.jsonl").string();
    cli_output({"synth", "--seed", "9", "--per-class", "60", "--out", d1}, code);
    same &= code == 0;
    cli_output({"synth", "--seed", "9", "--per-class", "60", "--out", d2}, code);
    same &= code == 0;
    const bool datasets = slurp(d1) == slurp(d2) && !slurp(d1).empty();

    bool models = true;
    for (const char* kind : {"lda", "qda", "knn1", "svm_linear", "svm_quadratic", "svm_cubic"}) {
      const auto m1 = (dir / "m1.json").string(), m2 = (dir / "m2.json").string();
      cli_output({"train", "--data", d1, "--classifier", kind, "--seed", "5", "--out", m1}, code);
      models &= code == 0;
      cli_output({"train", "--data", d2, "--classifier", kind, "--seed", "5", "--out", m2}, code);
      models &= code == 0 && slurp(m1) == slurp(m2);
    }

    // text reports carry no timings, so they must match byte for byte
    const std::vector<std::string> eval{"evaluate", "--data", d1, "--seed", "11"};
    int c1 = 0, c2 = 0;
    const auto r1 = cli_output(eval, c1), r2 = cli_output(eval, c2);
    const bool reports = c1 == 0 && c2 == 0 && r1 == r2;
    same &= datasets && models && reports;
    report("determinism: datasets, models, reports", same,
           std::string("datasets ") + (datasets ? "identical" : "DIFFER") + ", models " +
               (models ? "identical" : "DIFFER") + ", reports " + (reports ? "identical" : "DIFFER"));

    // round trip
    const auto ds = synth_generate([] {
      SynthSpec s;
      s.per_class = 40;
      s.participants = 5;
      s.seed = 3;
      return s;
    }());
    const FeatureConfig fc = FeatureConfig::parse("combined", "adjacent");
    Samples x;
    std::vector<PostureLabel> y;
    for (const auto& r : ds.records) {
      x.push_back(extract(r.skeleton, fc).values);
      y.push_back(*r.label);
    }
    Rng rng(99);
    std::size_t mismatches = 0;
    for (auto kind : grid_classifiers()) {
      ClassifierSpec spec;
      spec.kind = kind;
      ModelFile mf{train_classifier(x, y, fc.fingerprint(), spec), fc, ds.fingerprint()};
      const auto path = dir / "rt.json";
      save_model(mf, path);
      const auto back = load_model(path);
      for (int q = 0; q < 100; ++q) {
        const auto& base = ds.records[rng.below(ds.size())].skeleton;
        const auto s = base.map([&](const Point3& p) -> Point3 {
          return p + 0.05 * Point3(rng.normal(), rng.normal(), rng.normal());
        });
        const auto fv = extract(s, fc);
        const auto a = predict(mf.model, fv), b = predict(back.model, fv);
        if (a.label != b.label || a.votes != b.votes || a.scores != b.scores) ++mismatches;
      }
    }
    report("round trip: save_model -> load_model", mismatches == 0,
           fmt("%.0f prediction mismatches over 6 classifiers x 100 inputs", double(mismatches)));
  });
}

void format_fixtures() {
  criterion("format fixtures", [] {
    ConfusionMatrix::Counts c{};
    c[0] = {12, 0, 0, 1, 0};
    for (std::size_t k = 1; k < kLabelCount; ++k) c[k][k] = 10;
    EvaluationReport r;
    r.confusion = ConfusionMatrix(c);
    const auto text = render_report(r, ReportFormat::Text);
    std::string standing;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      if (line.rfind("Standing ", 0) == 0) standing = line;
    }
    std::vector<std::string> cells;
    std::istringstream row(standing);
    for (std::string tok; row >> tok;) cells.push_back(tok);
    const std::vector<std::string> want{"Standing", "92.3%", "0.0%", "0.0%", "7.7%", "0.0%"};
    const bool row_ok = cells == want;
    const bool rows_true = text.find("Rows: true class. Columns: predicted class.") != std::string::npos;
    report("format: row-normalized standing row", row_ok && format_percent(12, 13) == "92.3%" &&
                                               format_percent(1, 13) == "7.7%",
           "rendered row: " + standing.substr(0, standing.find_last_not_of(' ') + 1));
    report("format: rows are true classes", rows_true && r.confusion.row_total(PostureLabel::Standing) == 13,
           rows_true ? "report states rows are true classes, standing row sums to 13"
                     : "row convention line missing");
  });
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  synthetic_benchmark();
  trend_check();
  invariance_suite();
  smo_correctness();
  oracle_equivalences();
  determinism();
  format_fixtures();
  std::printf("%d criteria failed, %.1f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
