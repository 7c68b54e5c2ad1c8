#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rotorbar/cart.hpp"
#include "rotorbar/dataset.hpp"

namespace rotorbar {

enum class ClassifierKind { Cart, GaussianNB, Logistic, Ridge, SvmRbf };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view s);
/// Display name used in report tables.
std::string_view display_name(ClassifierKind kind);

struct LogisticParams {
  double l2_strength = 1.0;
  std::size_t max_iterations = 10000;
  double convergence_tol = 1e-6;
};

struct RidgeParams {
  double regularization_strength = 1.0;
};

struct SvmParams {
  double cost = 1.0;
  /// nullopt means 1 / n_features.
  std::optional<double> gamma;
  double smo_tol = 1e-3;
  /// Iteration budget is max_passes * n_rows.
  std::size_t max_passes = 1000;
  std::uint64_t seed = 0;
};

struct NaiveBayesParams {
  /// Added to every variance, relative to the largest feature variance.
  double var_smoothing = 1e-9;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::Cart;
  /// nullopt uses the per-kind default (on for Logistic, Ridge, SvmRbf).
  std::optional<bool> standardize;
  LogisticParams logistic;
  RidgeParams ridge;
  SvmParams svm;
  NaiveBayesParams naive_bayes;

  static ClassifierSpec of(ClassifierKind kind) {
    ClassifierSpec s;
    s.kind = kind;
    return s;
  }
  bool standardize_inputs() const;
  void validate() const;
};

nlohmann::json to_json(const ClassifierSpec& spec);
ClassifierSpec classifier_spec_from_json(const nlohmann::json& j);

/// Per-feature affine map x -> (x - mean) / scale, fixed at training time.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Dataset& data);
  std::vector<double> apply(std::span<const double> x) const;
  bool empty() const noexcept { return mean.empty(); }
};

struct NaiveBayesModel {
  // Index 0 is Healthy, 1 is Faulty.
  std::vector<double> means[2];
  std::vector<double> variances[2];
  double log_prior[2] = {0.0, 0.0};
  double variance_floor = 0.0;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  /// alpha_i * y_i for each support vector.
  std::vector<double> coef;
  double rho = 0.0;
  double gamma = 0.0;
  /// Dual variables for every training row, in training order.
  std::vector<double> alpha;
  std::size_t iterations = 0;
};

struct TrainedClassifier {
  ClassifierSpec spec;
  std::size_t n_features = 0;
  Standardizer standardizer;
  DecisionTree tree;
  NaiveBayesModel naive_bayes;
  LinearModel linear;
  SvmModel svm;

  ClassifierKind kind() const noexcept { return spec.kind; }
};

TrainedClassifier train(const ClassifierSpec& spec, const Dataset& data);

/// Higher means more Faulty. Cart and Logistic return probabilities; the
/// others return signed scores.
double score(const TrainedClassifier& clf, std::span<const double> x);

/// True for kinds whose score is a probability (classified at 0.5).
bool score_is_probability(ClassifierKind kind);
double decision_threshold(ClassifierKind kind);

nlohmann::json to_json(const TrainedClassifier& clf);
TrainedClassifier classifier_from_json(const nlohmann::json& j);

// Pieces exposed for numerical checks. Labels are 1 for Faulty, 0 for
// Healthy; `x` is row-major with `p` columns; params are (w..., b).
double logistic_objective(std::span<const double> x, std::span<const double> y, std::size_t p,
                          std::span<const double> params, double l2_strength);
std::vector<double> logistic_gradient(std::span<const double> x, std::span<const double> y,
                                      std::size_t p, std::span<const double> params,
                                      double l2_strength);

/// Relative residual of the centered ridge normal equations at the trained
/// weights, evaluated on `data` (standardized as during training).
double ridge_normal_residual(const TrainedClassifier& clf, const Dataset& data);

/// Largest KKT violation over the training rows of a trained SVM, using
/// y_i f(x_i) against 1 with the box constraint of each alpha.
double svm_kkt_violation(const TrainedClassifier& clf, const Dataset& data);

}  // namespace rotorbar
