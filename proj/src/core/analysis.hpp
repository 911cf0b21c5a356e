#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/losses.hpp"
#include "core/meta_objective.hpp"
#include "core/task_model.hpp"
#include "core/trainer.hpp"
#include "core/types.hpp"

namespace metastab {

// ---- stability -------------------------------------------------------------

struct StabilityOptions {
  /// Probe pairs (Z_K, z~) per trial; the max over them estimates the sup from below.
  std::size_t probes = 256;
  /// Probe laws are family tasks with feature covariance inflated by this factor.
  double envelope_widen = 2.0;
  /// Inner points replaced per perturbation; 0 runs the unperturbed control.
  std::optional<std::size_t> perturb_k;
  double leading_const = 1.0;
};

struct StabilityTrial {
  std::size_t task_index = 0;
  double max_difference = 0.0;
  double divergence = 0.0;
  /// max_difference <= 8 G ||w - w~||.
  bool chain_ok = true;
};

struct StabilityPoint {
  std::size_t m = 0;
  std::size_t n = 0;
  double gamma_hat = 0.0;
  double se = 0.0;
  double mean_divergence = 0.0;
  double gamma_theory = 0.0;
};

struct StabilityReport {
  double gamma_hat = 0.0;
  double gamma_se = 0.0;
  double gamma_theory = 0.0;
  std::vector<StabilityPoint> grid;
  /// Slope of log gamma_hat against log(mn); NaN for a single point.
  double fitted_slope = 0.0;
  std::vector<StabilityTrial> trials;
};

/// Throws ErrorCode::Premise unless beta_cap <= 1/(4L + 2 alpha rho G).
void check_stability_premise(const TrainerConfig& cfg, const LossConstants& c);

StabilityReport estimate_stability(const FamilyRecipe& family, const TrainerConfig& cfg, std::size_t trials,
                                   const LossModel& loss, const LossConstants& c, const StabilityOptions& options = {});

StabilityReport stability_grid(const FamilyRecipe& family, const TrainerConfig& base,
                               const std::vector<std::pair<std::size_t, std::size_t>>& grid, std::size_t trials,
                               const LossModel& loss, const LossConstants& c, const StabilityOptions& options = {});

double theoretical_gamma(const LossConstants& c, std::size_t m, std::size_t n, std::size_t k, double alpha,
                         double leading_const = 1.0);
double largek_gamma(const LossConstants& c, std::size_t m, std::size_t n, std::size_t k, double alpha,
                    double leading_const = 1.0);
/// K at which L K / (mn mu) = 1 / sqrt(K).
double largek_crossover(const LossConstants& c, std::size_t m, std::size_t n);

/// F(w) - F-hat(w, S), with the standard error of the Monte Carlo part.
Estimate generalization_gap(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                            const LossModel& loss, std::uint64_t seed);

// ---- total variation and shift ---------------------------------------------

enum class TvMethod { MonteCarlo, Numeric1D };

Estimate tv_distance(const TaskSpec& p, const TaskSpec& q, TvMethod method, std::size_t samples, Stream& rng);
/// TV between p and the mixture sum_i w_i q_i (uniform when weights are empty).
Estimate tv_to_mixture(const TaskSpec& p, const std::vector<TaskSpec>& components, std::span<const double> weights,
                       std::size_t samples, Stream& rng);
/// Closed-form TV of N(m1, v) and N(m2, v): 2 Phi(|m1 - m2| / (2 sqrt v)) - 1.
double tv_equal_variance_normals(double m1, double m2, double variance);

struct ShiftOptions {
  std::size_t tv_samples = 200'000;
  std::uint64_t seed = 0;
  std::vector<double> weights;
  /// Shape used for the large-K stability value.
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 5;
  double leading_const = 1.0;
};

struct ShiftReport {
  std::vector<Estimate> tv_pairwise;
  Estimate tv_to_mixture;
  double d_bound = 0.0;
  std::optional<double> weighted_d_bound;
  std::optional<Estimate> tv_to_weighted_mixture;
  double largek_gamma = 0.0;
  std::optional<double> mixture_bound;
  /// The pairwise coefficient differs between the two bound variants (4 vs 12 alpha G^2).
  std::string constants_note;
};

double d_bound_value(std::span<const double> tv_pairwise, double tv_mixture, const LossConstants& c, double alpha);
double weighted_d_bound_value(std::span<const double> tv_pairwise, double tv_weighted_mixture,
                              std::span<const double> weights, const LossConstants& c, double alpha);

ShiftReport shift_bound(const TaskSpec& unseen, const std::vector<TaskSpec>& seen, const LossConstants& c, double alpha,
                        const ShiftOptions& options = {});

double mixture_generalization_bound(double d_unseen, std::span<const double> per_seen_d, double pi_unseen,
                                    std::span<const double> pi_seen);

struct ExcessLoss {
  Estimate excess;
  double bound = 0.0;
  std::optional<double> composite;
};

/// |F_{m+1}(w) - F(w)| by Monte Carlo, with the shift bound and, when a
/// training excess is supplied, the composite epsilon + 2D.
ExcessLoss excess_loss_new_task(const Vector& w, const TaskSpec& unseen, const TaskCollection& seen,
                                const MetaConfig& cfg, const LossModel& loss, const ShiftReport& shift,
                                std::uint64_t seed, std::optional<double> training_excess = std::nullopt);

// ---- convergence -----------------------------------------------------------

struct SuboptimalityPoint {
  std::size_t t = 0;
  double averaged = 0.0;
  double last = 0.0;
};

struct ConvergenceReport {
  double averaged_exponent = 0.0;
  double last_exponent = 0.0;
  bool averaged_bound_ok = false;
  bool last_bound_ok = false;
};

ConvergenceReport convergence_report(const std::vector<SuboptimalityPoint>& points, const LossConstants& c,
                                     double alpha, double beta_cap);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace metastab
