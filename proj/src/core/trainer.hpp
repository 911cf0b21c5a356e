#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "core/losses.hpp"
#include "core/meta_objective.hpp"
#include "core/rng.hpp"
#include "core/task_model.hpp"
#include "core/types.hpp"

namespace metastab {

struct TrainerConfig {
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t k = 5;
  std::size_t b = 1;
  std::size_t r = 1;
  std::size_t t_max = 1000;
  double alpha = 0.1;
  double beta_cap = 1.0;
  std::uint64_t seed = 0;
  /// Empty center means a ball around the origin of the data dimension.
  ConstraintSet constraint;
  bool record_overlap = false;
  std::optional<PerturbationTarget> overlap_target;
  /// Use every inner and outer sample instead of drawing batches; gives
  /// deterministic projected gradient descent on F-hat when k = n.
  bool full_batch = false;
  std::optional<Vector> w0;
  /// Record F-hat at rounds 0, 1, 2, 4, ... and T.
  bool record_loss = false;
  std::size_t trace_subsets = 2'000;
  /// Called with (t, w^t) for t = 0..T.
  std::function<void(std::size_t, const Vector&)> observer;

  void validate(const TaskCollection& collection, const LossModel& loss) const;
  ConstraintSet resolved_constraint(int dim) const;
  MetaConfig meta() const;
};

struct LossTracePoint {
  std::size_t t = 0;
  double beta = 0.0;
  double fhat = 0.0;
};

struct OverlapPoint {
  std::size_t t = 0;
  std::size_t u = 0;
  std::size_t v = 0;
};

struct TrainerOutput {
  Vector last_iterate;
  Vector averaged_iterate;
  std::vector<LossTracePoint> loss_trace;
  std::vector<OverlapPoint> overlap_trace;
  std::size_t rounds = 0;
  double beta_cap = 0.0;
  double mu = 0.0;
  std::optional<PerturbationTarget> overlap_target;
};

/// min(beta_cap, 8 / (mu (t + 1))).
double stepsize(std::size_t t, double beta_cap, double mu);

/// Randomness of round t: task choice plus per-task, per-local-step batch streams.
class RoundStreams {
 public:
  RoundStreams(std::uint64_t seed, std::size_t t);
  /// r distinct task indices in increasing order.
  std::vector<std::size_t> choose_tasks(std::size_t m, std::size_t r) const;
  Stream batches(std::size_t task, std::size_t local_step) const;

 private:
  Stream base_;
};

BatchIndices round_batch(const TrainerConfig& cfg, std::size_t n, Stream& rng);
Vector round_gradient(const Vector& w, const TaskDataset& dataset, const BatchIndices& idx, const TrainerConfig& cfg,
                      const LossModel& loss);

/// Projected stochastic MAML (one meta-gradient per selected task and round).
TrainerOutput maml_train(const TaskCollection& collection, const TrainerConfig& cfg, const LossModel& loss);

struct CoupledRound {
  std::size_t t = 0;
  double beta = 0.0;
  /// Distance after the round's update.
  double d = 0.0;
  std::size_t u = 0;
  std::size_t v = 0;
};

struct CoupledOutput {
  Vector w;
  Vector w_tilde;
  double divergence = 0.0;
  std::vector<CoupledRound> trace;
};

/// Two trainings sharing every index-level draw; `target` names the
/// perturbed positions so u_t and v_t can be recorded.
CoupledOutput coupled_train(const TaskCollection& original, const TaskCollection& perturbed,
                            const PerturbationTarget& target, const TrainerConfig& cfg, const LossModel& loss);

struct OverlapSummary {
  double mean_u = 0.0;
  double mean_v = 0.0;
  double stderr_u = 0.0;
  double stderr_v = 0.0;
};

OverlapSummary overlap_statistics(const TrainerOutput& output);

/// 2 mu (2L + alpha rho G) / (16 (2L + alpha rho G) + mu).
double contraction_rate(const LossConstants& c, double alpha);

/// Right-hand side of the per-round divergence recursion.
double divergence_recursion_bound(double d, double beta, std::size_t u, std::size_t v, const LossConstants& c,
                                  const TrainerConfig& cfg);

}  // namespace metastab
