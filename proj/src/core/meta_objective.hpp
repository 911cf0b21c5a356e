#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "core/losses.hpp"
#include "core/rng.hpp"
#include "core/task_model.hpp"
#include "core/types.hpp"

namespace metastab {

struct MetaConfig {
  double alpha = 0.1;
  std::size_t k = 5;
  /// Exact enumeration over K-subsets when C(n, K) does not exceed this.
  std::uint64_t enumeration_cap = 100'000;
  /// Uniform K-subsets used above the cap.
  std::size_t mc_subsets = 20'000;
  std::size_t mc_population = 20'000;
  /// Keys the Monte Carlo subset draws, which makes the estimator a fixed
  /// function of w (value and gradient use the same subsets).
  std::uint64_t subset_seed = 0x5eed;

  void validate(std::size_t n) const;
};

struct MetaValue {
  double value = 0.0;
  bool exact = true;
  std::size_t subsets = 0;
};

struct MetaGradient {
  Vector gradient;
  bool exact = true;
  std::size_t subsets = 0;
};

/// C(n, k) as a double (exact below 2^53).
double binomial(std::size_t n, std::size_t k);
/// k-th combination (lexicographic) of {0..n-1} choose k.
std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k);
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Stream& rng);

/// Adapted loss averaged over an outer batch.
double adapted_batch_loss(const Vector& w, const Batch& inner, const Batch& outer, double alpha,
                          const LossModel& loss);
/// (I - alpha H_in) * mean outer gradient at the adapted point.
Vector meta_gradient_for_batches(const Vector& w, const Batch& inner, const Batch& outer, double alpha,
                                 const LossModel& loss);

MetaValue empirical_meta_loss(const Vector& w, const TaskDataset& dataset, const MetaConfig& cfg,
                              const LossModel& loss);
MetaGradient empirical_meta_gradient(const Vector& w, const TaskDataset& dataset, const MetaConfig& cfg,
                                     const LossModel& loss);

/// Index-level draw of one stochastic meta-gradient: K distinct inner
/// positions and b outer positions with replacement.
struct BatchIndices {
  std::vector<std::size_t> inner;
  std::vector<std::size_t> outer;
};

BatchIndices draw_batch_indices(std::size_t n, std::size_t k, std::size_t b, Stream& rng);
Vector meta_gradient_for_indices(const Vector& w, const TaskDataset& dataset, const BatchIndices& idx,
                                 double alpha, const LossModel& loss);
Vector stochastic_meta_gradient(const Vector& w, const TaskDataset& dataset, const MetaConfig& cfg,
                                const LossModel& loss, std::size_t b, Stream& rng);

/// F_i(w) by Monte Carlo over independent (K-batch, fresh z) pairs.
Estimate population_meta_loss(const Vector& w, const TaskSpec& task, const MetaConfig& cfg, const LossModel& loss,
                              Stream& rng);

/// Paired evaluation of F_i at two points with shared draws.
struct PairedEstimate {
  Estimate first;
  Estimate second;
  Estimate difference;
};
PairedEstimate population_meta_loss_paired(const Vector& first, const Vector& second, const TaskSpec& task,
                                           const MetaConfig& cfg, const LossModel& loss, Stream& rng);

/// Uniform (or q-weighted) average over tasks. Weights must be a probability vector.
double average_objectives(std::span<const double> values, std::span<const double> weights = {});
Vector average_objectives(std::span<const Vector> values, std::span<const double> weights = {});

/// 0.5 w'Qw + q'w + c.
struct QuadraticForm {
  Matrix hessian;
  Vector linear;
  double constant = 0.0;

  double value(const Vector& w) const { return 0.5 * w.dot(hessian * w) + linear.dot(w) + constant; }
  Vector gradient(const Vector& w) const { return hessian * w + linear; }
};

/// Exact quadratic representation of the empirical meta-loss; needs a loss
/// with constant Hessian. Uses the same subsets as empirical_meta_loss.
QuadraticForm empirical_meta_quadratic(const TaskDataset& dataset, const MetaConfig& cfg, const LossModel& loss);

struct SolveResult {
  Vector w;
  double value = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Gradient-mapping norm ||w - P(w - eta grad)|| / eta.
double gradient_mapping_norm(const Vector& w, const Vector& grad, double eta, const ConstraintSet& set);

SolveResult minimize_quadratic(const QuadraticForm& form, const ConstraintSet& set, double tol,
                               std::size_t max_iterations = 200'000);

/// Projected gradient descent for a generic smooth objective.
SolveResult minimize_projected(const std::function<double(const Vector&)>& value,
                               const std::function<Vector(const Vector&)>& gradient, const Vector& start,
                               double step, const ConstraintSet& set, double tol, std::size_t max_iterations);

/// min over W of F-hat(., S).
SolveResult minimize_empirical(const TaskCollection& collection, const MetaConfig& cfg, const LossModel& loss,
                               const ConstraintSet& set, double tol);

double empirical_objective(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                           const LossModel& loss);
Vector empirical_objective_gradient(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                                    const LossModel& loss);

struct ErrorReport {
  double test_error = 0.0;
  double generalization_error = 0.0;
  double training_error = 0.0;
  double empirical_min_value = 0.0;
  double population_min_value = 0.0;
  double se_test = 0.0;
  double se_gen = 0.0;

  /// min F-hat - min F; non-positive in expectation over S.
  double third_term() const { return empirical_min_value - population_min_value; }
};

struct DecompositionOptions {
  ConstraintSet set;
  double solver_tol = 1e-9;
  /// The population minimizer is proxied by minimizing on fresh data of size
  /// population_multiplier * n per task.
  std::size_t population_multiplier = 50;
  std::uint64_t seed = 0;
};

ErrorReport error_decomposition(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                                const LossModel& loss, const DecompositionOptions& options);

}  // namespace metastab
