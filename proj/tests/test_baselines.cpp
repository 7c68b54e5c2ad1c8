#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "rotorbar/baselines.hpp"
#include "rotorbar/errors.hpp"

using namespace rotorbar;
using testutil::make;

namespace {

Dataset affine(const Dataset& d, double c, double shift) {
  Dataset out(d.feature_names());
  std::vector<double> buf(d.features());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t j = 0; j < d.features(); ++j) buf[j] = c * d.at(r, j) + shift * (j + 1);
    out.add_row(buf, d.label(r));
  }
  return out;
}

double train_accuracy(const TrainedClassifier& clf, const Dataset& d) {
  std::size_t ok = 0;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const bool faulty = score(clf, d.row(r)) >= decision_threshold(clf.kind());
    ok += faulty == (d.label(r) == Condition::Faulty);
  }
  return static_cast<double>(ok) / d.rows();
}

}  // namespace

TEST(Spec, NamesAndDefaults) {
  for (auto k : {ClassifierKind::Cart, ClassifierKind::GaussianNB, ClassifierKind::Logistic,
                 ClassifierKind::Ridge, ClassifierKind::SvmRbf})
    EXPECT_EQ(parse_classifier_kind(to_string(k)), k);
  EXPECT_THROW(parse_classifier_kind("knn"), Error);
  EXPECT_TRUE(ClassifierSpec::of(ClassifierKind::Logistic).standardize_inputs());
  EXPECT_TRUE(ClassifierSpec::of(ClassifierKind::SvmRbf).standardize_inputs());
  EXPECT_FALSE(ClassifierSpec::of(ClassifierKind::GaussianNB).standardize_inputs());
  EXPECT_FALSE(ClassifierSpec::of(ClassifierKind::Cart).standardize_inputs());
  auto s = ClassifierSpec::of(ClassifierKind::Ridge);
  s.ridge.regularization_strength = 0.0;
  EXPECT_THROW(s.validate(), Error);
  s = ClassifierSpec::of(ClassifierKind::SvmRbf);
  s.svm.gamma = -1.0;
  EXPECT_THROW(s.validate(), Error);
}

TEST(Spec, JsonRoundTrip) {
  auto s = ClassifierSpec::of(ClassifierKind::SvmRbf);
  s.svm.cost = 10.0;
  s.svm.gamma = 0.25;
  s.standardize = false;
  const auto back = classifier_spec_from_json(to_json(s));
  EXPECT_EQ(to_json(back), to_json(s));
  EXPECT_EQ(classifier_spec_from_json(nlohmann::json("ridge")).kind, ClassifierKind::Ridge);
  EXPECT_THROW(classifier_spec_from_json(nlohmann::json{{"kind", "ridge"}, {"alpha", 1}}), Error);
}

TEST(NaiveBayes, RecoversClassMeans) {
  std::mt19937_64 g(5);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    x.push_back({z(g)});
    y.push_back(0);
    x.push_back({10.0 + z(g)});
    y.push_back(1);
  }
  const auto clf = train(ClassifierSpec::of(ClassifierKind::GaussianNB), make(x, y));
  EXPECT_NEAR(clf.naive_bayes.means[0][0], 0.0, 0.5);
  EXPECT_NEAR(clf.naive_bayes.means[1][0], 10.0, 0.5);
  EXPECT_NEAR(clf.naive_bayes.log_prior[0], std::log(0.5), 1e-12);
  EXPECT_GT(score(clf, std::vector<double>{9.0}), 0.0);
  EXPECT_LT(score(clf, std::vector<double>{1.0}), 0.0);
}

TEST(NaiveBayes, SymmetricModelScoresZero) {
  const auto d = make({{1, 5}, {2, 6}, {3, 7}, {1, 5}, {2, 6}, {3, 7}}, {0, 0, 0, 1, 1, 1});
  const auto clf = train(ClassifierSpec::of(ClassifierKind::GaussianNB), d);
  for (double a : {-3.0, 0.0, 2.0, 100.0}) EXPECT_NEAR(score(clf, std::vector<double>{a, a * 2}), 0.0, 1e-12);
}

TEST(NaiveBayes, ConstantFeatureStaysFinite) {
  const auto d = make({{1, 3}, {2, 3}, {3, 3}, {4, 3}, {5, 3}, {6, 3}}, {0, 0, 0, 1, 1, 1});
  const auto clf = train(ClassifierSpec::of(ClassifierKind::GaussianNB), d);
  EXPECT_GT(clf.naive_bayes.variance_floor, 0.0);
  for (int c = 0; c < 2; ++c)
    for (double v : clf.naive_bayes.variances[c]) EXPECT_GE(v, clf.naive_bayes.variance_floor);
  for (double b : {3.0, 3.5, -100.0}) EXPECT_TRUE(std::isfinite(score(clf, std::vector<double>{2.0, b})));

  // Every feature constant: the floor falls back to an absolute value.
  const auto flat = make({{1, 3}, {1, 3}, {1, 3}, {1, 3}}, {0, 0, 1, 1});
  const auto f = train(ClassifierSpec::of(ClassifierKind::GaussianNB), flat);
  EXPECT_TRUE(std::isfinite(score(f, std::vector<double>{7.0, -2.0})));
}

TEST(Logistic, HandSpotCheck) {
  TrainedClassifier clf;
  clf.spec = ClassifierSpec::of(ClassifierKind::Logistic);
  clf.spec.standardize = false;
  clf.n_features = 3;
  clf.linear.weights = {1.0, 0.0, 0.0};
  clf.linear.bias = 0.0;
  EXPECT_NEAR(score(clf, std::vector<double>{2.0, 5.0, -1.0}), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(score(clf, std::vector<double>{2.0, 5.0, -1.0}), 0.8808, 1e-4);
}

TEST(Logistic, SeparableDataFitsPerfectly) {
  auto spec = ClassifierSpec::of(ClassifierKind::Logistic);
  spec.logistic.l2_strength = 1e-3;
  const auto d = make({{-3}, {-2}, {-1}, {-0.5}, {0.5}, {1}, {2}, {3}}, {0, 0, 0, 0, 1, 1, 1, 1});
  const auto clf = train(spec, d);
  EXPECT_DOUBLE_EQ(train_accuracy(clf, d), 1.0);
  EXPECT_GT(clf.linear.weights[0], 0.0);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  std::mt19937_64 g(17);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = 40, p = 4;
  std::vector<double> x(n * p), y(n);
  for (auto& v : x) v = z(g);
  for (std::size_t i = 0; i < n; ++i) y[i] = (x[i * p] + 0.5 * z(g)) > 0 ? 1.0 : 0.0;
  for (int point = 0; point < 10; ++point) {
    std::vector<double> w(p + 1);
    for (auto& v : w) v = 2.0 * z(g);
    const auto grad = logistic_gradient(x, y, p, w, 0.7);
    for (std::size_t k = 0; k <= p; ++k) {
      const double h = 1e-5 * std::max(1.0, std::fabs(w[k]));
      auto up = w, down = w;
      up[k] += h;
      down[k] -= h;
      const double fd = (logistic_objective(x, y, p, up, 0.7) - logistic_objective(x, y, p, down, 0.7)) / (2 * h);
      EXPECT_LE(std::fabs(fd - grad[k]), 1e-5 * std::max(std::fabs(grad[k]), 1e-3)) << point << ":" << k;
    }
  }
}

TEST(Logistic, ConvergenceFailureReportsGradient) {
  auto spec = ClassifierSpec::of(ClassifierKind::Logistic);
  spec.logistic.max_iterations = 1;
  spec.logistic.convergence_tol = 1e-14;
  const auto d = testutil::blobs(30, 3, 1, 1.0, 2);
  try {
    train(spec, d);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Convergence);
    EXPECT_GT(e.final_gradient_norm(), 1e-14);
  }
}

TEST(Standardization, AffineInvariance) {
  const auto d = testutil::blobs(40, 4, 2, 1.0, 23);
  const auto moved = affine(d, 37.5, 1000.0);
  for (auto kind : {ClassifierKind::Logistic, ClassifierKind::Ridge}) {
    const auto a = train(ClassifierSpec::of(kind), d);
    const auto b = train(ClassifierSpec::of(kind), moved);
    for (std::size_t r = 0; r < d.rows(); ++r) {
      const double sa = score(a, d.row(r));
      const double sb = score(b, moved.row(r));
      EXPECT_NEAR(sa, sb, 1e-6 * std::max(1.0, std::fabs(sa))) << to_string(kind);
    }
  }
}

TEST(Standardization, StatisticsFromTrainingData) {
  const auto d = make({{1, 10}, {3, 10}, {5, 10}, {7, 10}}, {0, 0, 1, 1});
  const auto s = Standardizer::fit(d);
  EXPECT_DOUBLE_EQ(s.mean[0], 4.0);
  EXPECT_DOUBLE_EQ(s.scale[0], std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(s.scale[1], 1.0);
  const auto z = s.apply(std::vector<double>{4.0, 12.0});
  EXPECT_DOUBLE_EQ(z[0], 0.0);
  EXPECT_DOUBLE_EQ(z[1], 2.0);
}

TEST(Ridge, NormalEquationsHold) {
  const auto d = testutil::blobs(50, 6, 3, 0.7, 41);
  const auto clf = train(ClassifierSpec::of(ClassifierKind::Ridge), d);
  EXPECT_LE(ridge_normal_residual(clf, d), 1e-8);
}

TEST(Ridge, HeavyRegularizationCollapses) {
  const auto d = testutil::blobs(30, 3, 2, 2.0, 3);
  double prev = 1e300;
  for (double lam : {1.0, 1e3, 1e6, 1e9}) {
    auto spec = ClassifierSpec::of(ClassifierKind::Ridge);
    spec.ridge.regularization_strength = lam;
    const auto clf = train(spec, d);
    double norm = 0;
    for (double w : clf.linear.weights) norm += w * w;
    norm = std::sqrt(norm);
    EXPECT_LT(norm, prev);
    prev = norm;
  }
  EXPECT_LT(prev, 1e-6);
  // Balanced classes: the constant is the mean of the +-1 targets.
  auto spec = ClassifierSpec::of(ClassifierKind::Ridge);
  spec.ridge.regularization_strength = 1e12;
  const auto clf = train(spec, d);
  EXPECT_NEAR(score(clf, d.row(0)), 0.0, 1e-6);
}

TEST(Svm, SeparatesXor) {
  auto spec = ClassifierSpec::of(ClassifierKind::SvmRbf);
  spec.svm.cost = 1000.0;
  spec.svm.gamma = 1.0;
  spec.standardize = false;
  const auto d = make({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 0, 1, 1});
  const auto clf = train(spec, d);
  EXPECT_DOUBLE_EQ(train_accuracy(clf, d), 1.0);
  for (std::size_t r = 0; r < d.rows(); ++r) EXPECT_NE(score(clf, d.row(r)), 0.0);
}

TEST(Svm, KktWithinTolerance) {
  const auto d = testutil::blobs(60, 4, 2, 1.0, 55);
  for (double c : {0.1, 1.0, 10.0}) {
    auto spec = ClassifierSpec::of(ClassifierKind::SvmRbf);
    spec.svm.cost = c;
    const auto clf = train(spec, d);
    EXPECT_LE(svm_kkt_violation(clf, d), spec.svm.smo_tol) << "C=" << c;
    for (double a : clf.svm.alpha) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, c);
    }
  }
}

TEST(Baselines, DeterministicAndRoundTrip) {
  const auto d = testutil::blobs(40, 5, 2, 1.0, 8);
  for (auto kind : {ClassifierKind::Cart, ClassifierKind::GaussianNB, ClassifierKind::Logistic,
                    ClassifierKind::Ridge, ClassifierKind::SvmRbf}) {
    const auto a = train(ClassifierSpec::of(kind), d);
    const auto b = train(ClassifierSpec::of(kind), d);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump()) << to_string(kind);
    const auto back = classifier_from_json(nlohmann::json::parse(to_json(a).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(a).dump());
    for (std::size_t r = 0; r < d.rows(); ++r) EXPECT_EQ(score(back, d.row(r)), score(a, d.row(r)));
    EXPECT_GE(train_accuracy(a, d), 0.75) << to_string(kind);
  }
}

TEST(Baselines, Errors) {
  const auto d = testutil::blobs(10, 3, 1, 1.0, 8);
  const auto clf = train(ClassifierSpec::of(ClassifierKind::Ridge), d);
  try {
    score(clf, std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FeatureArity);
  }
  testutil::Dataset one(testutil::names(1));
  one.add_row(std::vector<double>{1.0}, Condition::Faulty);
  one.add_row(std::vector<double>{2.0}, Condition::Faulty);
  EXPECT_THROW(train(ClassifierSpec::of(ClassifierKind::Logistic), one), Error);
  testutil::Dataset nan_set(testutil::names(1));
  nan_set.add_row(std::vector<double>{NAN}, Condition::Faulty);
  nan_set.add_row(std::vector<double>{2.0}, Condition::Healthy);
  EXPECT_THROW(train(ClassifierSpec::of(ClassifierKind::GaussianNB), nan_set), Error);
}
