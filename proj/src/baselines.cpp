#include "rotorbar/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "rotorbar/errors.hpp"
#include "rotorbar/rng.hpp"

namespace rotorbar {

using nlohmann::json;

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Cart: return "cart";
    case ClassifierKind::GaussianNB: return "gaussian_nb";
    case ClassifierKind::Logistic: return "logistic";
    case ClassifierKind::Ridge: return "ridge";
    case ClassifierKind::SvmRbf: return "svm_rbf";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view s) {
  for (auto k : {ClassifierKind::Cart, ClassifierKind::GaussianNB, ClassifierKind::Logistic,
                 ClassifierKind::Ridge, ClassifierKind::SvmRbf})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::Configuration, "unknown classifier '" + std::string(s) + "'");
}

std::string_view display_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Cart: return "CART";
    case ClassifierKind::GaussianNB: return "Naive Bayes";
    case ClassifierKind::Logistic: return "Logistic regression";
    case ClassifierKind::Ridge: return "Linear Ridge";
    case ClassifierKind::SvmRbf: return "SVM";
  }
  return "?";
}

bool ClassifierSpec::standardize_inputs() const {
  if (standardize) return *standardize;
  return kind == ClassifierKind::Logistic || kind == ClassifierKind::Ridge ||
         kind == ClassifierKind::SvmRbf;
}

void ClassifierSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::Configuration, what);
  };
  require(logistic.l2_strength > 0.0, "logistic l2_strength must be > 0");
  require(logistic.convergence_tol > 0.0, "logistic convergence_tol must be > 0");
  require(logistic.max_iterations >= 1, "logistic max_iterations must be >= 1");
  require(ridge.regularization_strength > 0.0, "ridge regularization_strength must be > 0");
  require(svm.cost > 0.0, "svm cost must be > 0");
  require(!svm.gamma || *svm.gamma > 0.0, "svm gamma must be > 0");
  require(svm.smo_tol > 0.0, "svm smo_tol must be > 0");
  require(svm.max_passes >= 1, "svm max_passes must be >= 1");
  require(naive_bayes.var_smoothing > 0.0, "naive bayes var_smoothing must be > 0");
}

json to_json(const ClassifierSpec& s) {
  json j{{"kind", to_string(s.kind)}, {"standardize", s.standardize_inputs()}};
  switch (s.kind) {
    case ClassifierKind::Cart: break;
    case ClassifierKind::GaussianNB:
      j["var_smoothing"] = s.naive_bayes.var_smoothing;
      break;
    case ClassifierKind::Logistic:
      j["l2_strength"] = s.logistic.l2_strength;
      j["max_iterations"] = s.logistic.max_iterations;
      j["convergence_tol"] = s.logistic.convergence_tol;
      break;
    case ClassifierKind::Ridge:
      j["regularization_strength"] = s.ridge.regularization_strength;
      break;
    case ClassifierKind::SvmRbf:
      j["cost"] = s.svm.cost;
      j["gamma"] = s.svm.gamma ? json(*s.svm.gamma) : json("auto");
      j["smo_tol"] = s.svm.smo_tol;
      j["max_passes"] = s.svm.max_passes;
      j["seed"] = s.svm.seed;
      break;
  }
  return j;
}

ClassifierSpec classifier_spec_from_json(const json& j) {
  ClassifierSpec s;
  try {
    if (j.is_string()) {
      s.kind = parse_classifier_kind(j.get<std::string>());
      return s;
    }
    s.kind = parse_classifier_kind(j.at("kind").get<std::string>());
    for (const auto& [key, v] : j.items()) {
      if (key == "kind") continue;
      if (key == "standardize") s.standardize = v.get<bool>();
      else if (key == "var_smoothing") s.naive_bayes.var_smoothing = v.get<double>();
      else if (key == "l2_strength") s.logistic.l2_strength = v.get<double>();
      else if (key == "max_iterations") s.logistic.max_iterations = v.get<std::size_t>();
      else if (key == "convergence_tol") s.logistic.convergence_tol = v.get<double>();
      else if (key == "regularization_strength") s.ridge.regularization_strength = v.get<double>();
      else if (key == "cost") s.svm.cost = v.get<double>();
      else if (key == "gamma") {
        if (v.is_string() && v.get<std::string>() == "auto") s.svm.gamma.reset();
        else s.svm.gamma = v.get<double>();
      } else if (key == "smo_tol") s.svm.smo_tol = v.get<double>();
      else if (key == "max_passes") s.svm.max_passes = v.get<std::size_t>();
      else if (key == "seed") s.svm.seed = v.get<std::uint64_t>();
      else throw Error(ErrorKind::Configuration, "unknown classifier key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("classifier spec: ") + e.what());
  }
  s.validate();
  return s;
}

Standardizer Standardizer::fit(const Dataset& data) {
  const std::size_t n = data.rows(), p = data.features();
  Standardizer s;
  s.mean.assign(p, 0.0);
  s.scale.assign(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += data.at(i, j);
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (data.at(i, j) - m) * (data.at(i, j) - m);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.mean[j] = m;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  if (empty()) return out;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (out[j] - mean[j]) / scale[j];
  return out;
}

namespace {

int class_index(Condition c) { return c == Condition::Faulty ? 1 : 0; }

// Row-major copy of the (optionally standardized) design matrix.
std::vector<double> design(const Dataset& data, const Standardizer& st) {
  std::vector<double> x;
  x.reserve(data.rows() * data.features());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = st.apply(data.row(i));
    x.insert(x.end(), r.begin(), r.end());
  }
  return x;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---- Gaussian naive Bayes

NaiveBayesModel fit_naive_bayes(const Dataset& data, double smoothing) {
  const std::size_t n = data.rows(), p = data.features();
  NaiveBayesModel m;
  double max_var = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.at(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (data.at(i, j) - mean) * (data.at(i, j) - mean);
    max_var = std::max(max_var, ss / static_cast<double>(n));
  }
  m.variance_floor = smoothing * (max_var > 0.0 ? max_var : 1.0);

  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (class_index(data.label(i)) == c) idx.push_back(i);
    const auto nc = static_cast<double>(idx.size());
    m.log_prior[c] = std::log(nc / static_cast<double>(n));
    m.means[c].assign(p, 0.0);
    m.variances[c].assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      double mean = 0.0;
      for (auto i : idx) mean += data.at(i, j);
      mean /= nc;
      double ss = 0.0;
      for (auto i : idx) ss += (data.at(i, j) - mean) * (data.at(i, j) - mean);
      m.means[c][j] = mean;
      m.variances[c][j] = ss / nc + m.variance_floor;
    }
  }
  return m;
}

double naive_bayes_score(const NaiveBayesModel& m, std::span<const double> x) {
  double ll[2];
  for (int c = 0; c < 2; ++c) {
    double s = m.log_prior[c];
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = m.variances[c][j];
      const double d = x[j] - m.means[c][j];
      s += -0.5 * std::log(2.0 * M_PI * v) - 0.5 * d * d / v;
    }
    ll[c] = s;
  }
  return ll[1] - ll[0];
}

// ---- Logistic regression

LinearModel fit_logistic(const std::vector<double>& x, const std::vector<double>& y, std::size_t p,
                         const LogisticParams& prm) {
  const std::size_t d = p + 1;
  std::vector<double> theta(d, 0.0);
  auto f = [&](std::span<const double> t) { return logistic_objective(x, y, p, t, prm.l2_strength); };
  auto grad = [&](std::span<const double> t) { return logistic_gradient(x, y, p, t, prm.l2_strength); };
  auto norm = [](const std::vector<double>& v) { return std::sqrt(dot(v, v)); };

  double fx = f(theta);
  std::vector<double> g = grad(theta);
  double step = 1.0;
  std::vector<double> trial(d);
  for (std::size_t it = 0; it < prm.max_iterations; ++it) {
    const double gnorm = norm(g);
    if (gnorm < prm.convergence_tol) return {{theta.begin(), theta.begin() + static_cast<long>(p)}, theta[p]};
    // Armijo backtracking from the Barzilai-Borwein trial step.
    double a = step;
    double ft = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t k = 0; k < d; ++k) trial[k] = theta[k] - a * g[k];
      ft = f(trial);
      if (ft <= fx - 1e-4 * a * gnorm * gnorm) break;
      a *= 0.5;
    }
    auto g_new = grad(trial);
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double s = trial[k] - theta[k];
      const double yk = g_new[k] - g[k];
      ss += s * s;
      sy += s * yk;
    }
    theta.swap(trial);
    g.swap(g_new);
    fx = ft;
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
  }
  const double gnorm = norm(g);
  if (gnorm < prm.convergence_tol) return {{theta.begin(), theta.begin() + static_cast<long>(p)}, theta[p]};
  throw ConvergenceError("logistic regression did not reach gradient norm " +
                             std::to_string(prm.convergence_tol) + " in " +
                             std::to_string(prm.max_iterations) + " iterations",
                         gnorm);
}

// ---- Ridge

struct RidgeSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd rhs;
  Eigen::RowVectorXd x_mean;
  double y_mean = 0.0;
};

RidgeSystem ridge_system(const std::vector<double>& xv, const Dataset& data, double lambda) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto p = static_cast<Eigen::Index>(data.features());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(xv.data(), n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i)
    y[i] = data.label(static_cast<std::size_t>(i)) == Condition::Faulty ? 1.0 : -1.0;
  RidgeSystem s;
  s.x_mean = x.colwise().mean();
  s.y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - s.x_mean;
  s.a = xc.transpose() * xc;
  s.a.diagonal().array() += lambda;
  s.rhs = xc.transpose() * (y.array() - s.y_mean).matrix();
  return s;
}

// ---- SVM (SMO with maximal violating pair selection)

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d);
}

SvmModel fit_svm(const std::vector<double>& xv, const Dataset& data, const SvmParams& prm) {
  const std::size_t n = data.rows(), p = data.features();
  const double c = prm.cost;
  const double gamma = prm.gamma.value_or(1.0 / static_cast<double>(p));
  auto row = [&](std::size_t i) { return std::span<const double>(xv.data() + i * p, p); };

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = data.label(i) == Condition::Faulty ? 1.0 : -1.0;
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) k[i * n + j] = k[j * n + i] = rbf(row(i), row(j), gamma);
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * k[i * n + j]; };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(prm.seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };

  const std::size_t budget = prm.max_passes * n;
  std::size_t iter = 0;
  double gap = 0.0, m_up = 0.0, m_low = 0.0;
  for (;; ++iter) {
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t : order) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m_up) m_up = v, i = t;
      if (in_low(t) && v < m_low) m_low = v, j = t;
    }
    gap = m_up - m_low;
    if (i == n || j == n || gap < prm.smo_tol) break;
    if (iter >= budget)
      throw ConvergenceError("SMO did not reach tolerance " + std::to_string(prm.smo_tol) + " in " +
                                 std::to_string(budget) + " iterations",
                             gap);

    const double ai = alpha[i], aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0) quad = 1e-12;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = c - diff;
      } else {
        if (alpha[j] > c) alpha[j] = c, alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0) quad = 1e-12;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = sum - c;
      } else {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) alpha[j] = c, alpha[i] = sum - c;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
      }
    }
    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
  }

  // rho from the free vectors; any value in [m_low, m_up] keeps KKT within tol.
  double free_sum = 0.0;
  std::size_t free_n = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0 && alpha[t] < c) {
      free_sum += y[t] * grad[t];
      ++free_n;
    }
  }
  SvmModel m;
  if (free_n > 0) {
    m.rho = free_sum / static_cast<double>(free_n);
  } else if (std::isfinite(m_up) && std::isfinite(m_low)) {
    m.rho = -(m_up + m_low) / 2.0;
  }
  m.gamma = gamma;
  m.alpha = alpha;
  m.iterations = iter;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0) {
      const auto r = row(t);
      m.support_vectors.emplace_back(r.begin(), r.end());
      m.coef.push_back(alpha[t] * y[t]);
    }
  }
  return m;
}

double svm_decision(const SvmModel& m, std::span<const double> x) {
  double s = -m.rho;
  for (std::size_t i = 0; i < m.coef.size(); ++i) s += m.coef[i] * rbf(m.support_vectors[i], x, m.gamma);
  return s;
}

}  // namespace

double logistic_objective(std::span<const double> x, std::span<const double> y, std::size_t p,
                          std::span<const double> params, double l2_strength) {
  const std::size_t n = y.size();
  const auto w = params.subspan(0, p);
  const double b = params[p];
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = dot(w, x.subspan(i * p, p)) + b;
    s += softplus(z) - y[i] * z;
  }
  const auto nd = static_cast<double>(n);
  return s / nd + l2_strength / (2.0 * nd) * dot(w, w);
}

std::vector<double> logistic_gradient(std::span<const double> x, std::span<const double> y,
                                      std::size_t p, std::span<const double> params,
                                      double l2_strength) {
  const std::size_t n = y.size();
  const auto w = params.subspan(0, p);
  const double b = params[p];
  std::vector<double> g(p + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.subspan(i * p, p);
    const double r = sigmoid(dot(w, xi) + b) - y[i];
    for (std::size_t j = 0; j < p; ++j) g[j] += r * xi[j];
    g[p] += r;
  }
  const auto nd = static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) g[j] = g[j] / nd + l2_strength / nd * w[j];
  g[p] /= nd;
  return g;
}

TrainedClassifier train(const ClassifierSpec& spec, const Dataset& data) {
  spec.validate();
  if (data.rows() == 0 || data.features() == 0)
    throw Error(ErrorKind::EmptyDataset, "cannot train on an empty dataset");
  if (data.count(Condition::Healthy) == 0 || data.count(Condition::Faulty) == 0)
    throw Error(ErrorKind::DegenerateLabels, "training data must contain both classes");
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (double v : data.row(i))
      if (std::isnan(v)) throw Error(ErrorKind::Format, "NaN feature value in training data");

  TrainedClassifier clf;
  clf.spec = spec;
  clf.n_features = data.features();
  if (spec.standardize_inputs()) clf.standardizer = Standardizer::fit(data);
  const std::size_t p = data.features();

  switch (spec.kind) {
    case ClassifierKind::Cart: {
      const Dataset d = clf.standardizer.empty() ? data : [&] {
        Dataset s(data.feature_names());
        for (std::size_t i = 0; i < data.rows(); ++i)
          s.add_row(clf.standardizer.apply(data.row(i)), data.label(i), data.info(i));
        return s;
      }();
      clf.tree = fit_tree(d, TreeFitConfig{});
      break;
    }
    case ClassifierKind::GaussianNB: {
      if (clf.standardizer.empty()) {
        clf.naive_bayes = fit_naive_bayes(data, spec.naive_bayes.var_smoothing);
      } else {
        Dataset s(data.feature_names());
        for (std::size_t i = 0; i < data.rows(); ++i)
          s.add_row(clf.standardizer.apply(data.row(i)), data.label(i), data.info(i));
        clf.naive_bayes = fit_naive_bayes(s, spec.naive_bayes.var_smoothing);
      }
      break;
    }
    case ClassifierKind::Logistic: {
      const auto x = design(data, clf.standardizer);
      std::vector<double> y(data.rows());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = data.label(i) == Condition::Faulty ? 1.0 : 0.0;
      clf.linear = fit_logistic(x, y, p, spec.logistic);
      break;
    }
    case ClassifierKind::Ridge: {
      const auto x = design(data, clf.standardizer);
      const auto sys = ridge_system(x, data, spec.ridge.regularization_strength);
      const Eigen::VectorXd w = sys.a.ldlt().solve(sys.rhs);
      clf.linear.weights.assign(w.data(), w.data() + w.size());
      clf.linear.bias = sys.y_mean - sys.x_mean.dot(w);
      break;
    }
    case ClassifierKind::SvmRbf: {
      const auto x = design(data, clf.standardizer);
      clf.svm = fit_svm(x, data, spec.svm);
      break;
    }
  }
  return clf;
}

double score(const TrainedClassifier& clf, std::span<const double> x) {
  if (x.size() != clf.n_features)
    throw Error(ErrorKind::FeatureArity, "classifier expects " + std::to_string(clf.n_features) +
                                             " features, got " + std::to_string(x.size()));
  const auto z = clf.standardizer.apply(x);
  switch (clf.kind()) {
    case ClassifierKind::Cart: return predict_tree(clf.tree, z);
    case ClassifierKind::GaussianNB: return naive_bayes_score(clf.naive_bayes, z);
    case ClassifierKind::Logistic: return sigmoid(dot(clf.linear.weights, z) + clf.linear.bias);
    case ClassifierKind::Ridge: return dot(clf.linear.weights, z) + clf.linear.bias;
    case ClassifierKind::SvmRbf: return svm_decision(clf.svm, z);
  }
  return 0.0;
}

bool score_is_probability(ClassifierKind kind) {
  return kind == ClassifierKind::Cart || kind == ClassifierKind::Logistic;
}

double decision_threshold(ClassifierKind kind) { return score_is_probability(kind) ? 0.5 : 0.0; }

double ridge_normal_residual(const TrainedClassifier& clf, const Dataset& data) {
  if (clf.kind() != ClassifierKind::Ridge)
    throw Error(ErrorKind::Configuration, "ridge_normal_residual needs a ridge model");
  const auto x = design(data, clf.standardizer);
  const auto sys = ridge_system(x, data, clf.spec.ridge.regularization_strength);
  const Eigen::Map<const Eigen::VectorXd> w(clf.linear.weights.data(),
                                            static_cast<Eigen::Index>(clf.linear.weights.size()));
  const double scale = std::max(sys.rhs.norm(), std::numeric_limits<double>::min());
  return (sys.a * w - sys.rhs).norm() / scale;
}

double svm_kkt_violation(const TrainedClassifier& clf, const Dataset& data) {
  if (clf.kind() != ClassifierKind::SvmRbf)
    throw Error(ErrorKind::Configuration, "svm_kkt_violation needs an SVM model");
  if (clf.svm.alpha.size() != data.rows())
    throw Error(ErrorKind::FeatureArity, "dataset is not the SVM's training set");
  const double c = clf.spec.svm.cost;
  double worst = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double y = data.label(i) == Condition::Faulty ? 1.0 : -1.0;
    const double margin = y * score(clf, data.row(i));
    const double a = clf.svm.alpha[i];
    double v;
    if (a <= 0.0) v = std::max(0.0, 1.0 - margin);
    else if (a >= c) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

json to_json(const TrainedClassifier& clf) {
  json j{{"spec", to_json(clf.spec)}, {"n_features", clf.n_features}};
  if (!clf.standardizer.empty())
    j["standardizer"] = {{"mean", clf.standardizer.mean}, {"scale", clf.standardizer.scale}};
  switch (clf.kind()) {
    case ClassifierKind::Cart: j["tree"] = clf.tree.to_json(); break;
    case ClassifierKind::GaussianNB: {
      const auto& m = clf.naive_bayes;
      j["naive_bayes"] = {{"means", {m.means[0], m.means[1]}},
                          {"variances", {m.variances[0], m.variances[1]}},
                          {"log_prior", {m.log_prior[0], m.log_prior[1]}},
                          {"variance_floor", m.variance_floor}};
      break;
    }
    case ClassifierKind::Logistic:
    case ClassifierKind::Ridge:
      j["weights"] = clf.linear.weights;
      j["bias"] = clf.linear.bias;
      break;
    case ClassifierKind::SvmRbf:
      j["svm"] = {{"support_vectors", clf.svm.support_vectors},
                  {"coef", clf.svm.coef},
                  {"rho", clf.svm.rho},
                  {"gamma", clf.svm.gamma}};
      break;
  }
  return j;
}

TrainedClassifier classifier_from_json(const json& j) {
  TrainedClassifier clf;
  try {
    clf.spec = classifier_spec_from_json(j.at("spec"));
    clf.n_features = j.at("n_features").get<std::size_t>();
    if (j.contains("standardizer")) {
      clf.standardizer.mean = j["standardizer"].at("mean").get<std::vector<double>>();
      clf.standardizer.scale = j["standardizer"].at("scale").get<std::vector<double>>();
    }
    switch (clf.kind()) {
      case ClassifierKind::Cart: clf.tree = DecisionTree::from_json(j.at("tree")); break;
      case ClassifierKind::GaussianNB: {
        const auto& nb = j.at("naive_bayes");
        for (int c = 0; c < 2; ++c) {
          clf.naive_bayes.means[c] = nb.at("means").at(c).get<std::vector<double>>();
          clf.naive_bayes.variances[c] = nb.at("variances").at(c).get<std::vector<double>>();
          clf.naive_bayes.log_prior[c] = nb.at("log_prior").at(c).get<double>();
        }
        clf.naive_bayes.variance_floor = nb.at("variance_floor").get<double>();
        break;
      }
      case ClassifierKind::Logistic:
      case ClassifierKind::Ridge:
        clf.linear.weights = j.at("weights").get<std::vector<double>>();
        clf.linear.bias = j.at("bias").get<double>();
        break;
      case ClassifierKind::SvmRbf: {
        const auto& s = j.at("svm");
        clf.svm.support_vectors = s.at("support_vectors").get<std::vector<std::vector<double>>>();
        clf.svm.coef = s.at("coef").get<std::vector<double>>();
        clf.svm.rho = s.at("rho").get<double>();
        clf.svm.gamma = s.at("gamma").get<double>();
        break;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("classifier: ") + e.what());
  }
  return clf;
}

}  // namespace rotorbar
