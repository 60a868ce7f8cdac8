#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nextcall {

struct NoExamplesError : std::runtime_error {
  NoExamplesError();
};
struct SingleClassError : std::runtime_error {
  SingleClassError();
};
struct NonFiniteLossError : std::runtime_error {
  NonFiniteLossError();
};
struct DimensionMismatchError : std::runtime_error {
  explicit DimensionMismatchError(const std::string& what);
};
struct ModelFormatError : std::runtime_error {
  explicit ModelFormatError(const std::string& what);
};

struct TrainOptions {
  double reg_lambda = 1e-3;  // L2 on weights, never on biases
  int max_iters = 500;
  double tol = 1e-8;  // absolute loss decrease that counts as converged
};

struct TrainMeta {
  std::size_t n_train = 0;
  int iterations = 0;
  double final_loss = 0.0;
};

/// Per-feature affine normalization applied before the linear map:
/// z_j = (x_j - mean_j) / scale_j.  Indicator coordinates keep (0, 1).
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;
};

/// Multinomial logistic model over a fixed class set.
struct ModelWeights {
  std::size_t n_classes = 0;
  std::size_t dim = 0;
  std::vector<double> w;  // row-major, n_classes x dim
  std::vector<double> b;  // n_classes
  double reg_lambda = 0.0;
  Standardization standardization;
  std::vector<std::string> class_set;
  TrainMeta meta;
};

/// Mean cross-entropy over examples plus (lambda/2)*||w||_F^2, with its exact
/// gradient.  Inputs are already standardized.
struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_w;
  std::vector<double> grad_b;
};

LossGrad loss_and_gradient(std::span<const double> w, std::span<const double> b,
                           std::size_t n_classes, std::size_t dim,
                           std::span<const std::vector<double>> x,
                           std::span<const std::size_t> labels, double reg_lambda);

double loss_only(std::span<const double> w, std::span<const double> b,
                 std::size_t n_classes, std::size_t dim,
                 std::span<const std::vector<double>> x,
                 std::span<const std::size_t> labels, double reg_lambda);

/// Per-iteration trace for inspection; optional.
struct TrainDiagnostics {
  std::vector<double> losses;  // loss after each accepted step
};

/// Full-batch gradient descent from zero initialization with backtracking
/// line search (Armijo condition, halving).  Deterministic: identical inputs
/// give bit-identical weights.  `continuous_indices` selects coordinates to
/// standardize with train-set mean and standard deviation (constant
/// coordinates keep scale 1).
ModelWeights train(std::span<const std::vector<double>> features,
                   std::span<const std::size_t> labels,
                   std::vector<std::string> class_set,
                   std::span<const std::size_t> continuous_indices,
                   const TrainOptions& options = {},
                   TrainDiagnostics* diagnostics = nullptr);

/// Class probabilities for a raw (unstandardized) feature vector; strictly
/// positive, summing to 1 up to rounding.
std::vector<double> predict_proba(const ModelWeights& model, std::span<const double> x);

/// Versioned little-endian flat file; load(save(m)) reproduces every byte of
/// the weights.
void save_model(const ModelWeights& model, const std::string& path);
ModelWeights load_model(const std::string& path);

}  // namespace nextcall
