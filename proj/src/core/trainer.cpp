#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace metastab {

void TrainerConfig::validate(const TaskCollection& collection, const LossModel& loss) const {
  collection.validate();
  require(m == collection.m() && n == collection.n(), ErrorCode::InvalidArgument,
          "trainer m and n must match the task collection");
  require(r >= 1 && r <= m, ErrorCode::InvalidArgument, "tasks per round r must satisfy 1 <= r <= m");
  require(k >= 1 && k <= n, ErrorCode::InvalidArgument, "adaptation batch size K must satisfy 1 <= K <= n");
  require(b >= 1, ErrorCode::InvalidArgument, "outer batch size b must be positive");
  require(alpha >= 0.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be finite and nonnegative");
  const double mu = loss.strong_convexity();
  require(mu > 0.0, ErrorCode::InvalidArgument, "the stepsize schedule needs a strongly convex loss");
  require(beta_cap > 0.0 && beta_cap <= 8.0 / mu, ErrorCode::InvalidArgument, "beta must satisfy 0 < beta <= 8/mu");
  constraint.validate();
  if (constraint.center.size() != 0) {
    require(constraint.center.size() == collection.dim(), ErrorCode::DimensionMismatch,
            "constraint center has the wrong dimension");
  }
  if (w0) {
    require(w0->size() == collection.dim(), ErrorCode::DimensionMismatch, "initial point has the wrong dimension");
    require(resolved_constraint(collection.dim()).contains(*w0, 1e-9), ErrorCode::InvalidArgument,
            "initial point must lie in W");
  }
  if (record_overlap) {
    require(overlap_target.has_value(), ErrorCode::NotRecorded, "overlap recording needs a perturbation target");
    require(overlap_target->task_index < m, ErrorCode::InvalidArgument, "overlap target task out of range");
  }
}

ConstraintSet TrainerConfig::resolved_constraint(int dim) const {
  ConstraintSet set = constraint;
  if (set.center.size() == 0) set.center = Vector::Zero(dim);
  return set;
}

MetaConfig TrainerConfig::meta() const {
  MetaConfig mc;
  mc.alpha = alpha;
  mc.k = k;
  mc.mc_subsets = trace_subsets;
  return mc;
}

double stepsize(std::size_t t, double beta_cap, double mu) {
  return std::min(beta_cap, 8.0 / (mu * static_cast<double>(t + 1)));
}

RoundStreams::RoundStreams(std::uint64_t seed, std::size_t t) : base_(Stream(seed, 0, Purpose::Batches).derive(t)) {}

std::vector<std::size_t> RoundStreams::choose_tasks(std::size_t m, std::size_t r) const {
  Stream rng = base_.derive(static_cast<std::uint64_t>(Purpose::TaskChoice));
  std::vector<std::size_t> tasks = sample_distinct(m, r, rng);
  std::sort(tasks.begin(), tasks.end());
  return tasks;
}

Stream RoundStreams::batches(std::size_t task, std::size_t local_step) const {
  return base_.derive(combine_keys(task, local_step));
}

BatchIndices round_batch(const TrainerConfig& cfg, std::size_t n, Stream& rng) {
  if (!cfg.full_batch) return draw_batch_indices(n, cfg.k, cfg.b, rng);
  BatchIndices idx;
  idx.inner.resize(n);
  idx.outer.resize(n);
  for (std::size_t j = 0; j < n; ++j) idx.inner[j] = idx.outer[j] = j;
  return idx;
}

Vector round_gradient(const Vector& w, const TaskDataset& dataset, const BatchIndices& idx, const TrainerConfig& cfg,
                      const LossModel& loss) {
  return meta_gradient_for_indices(w, dataset, idx, cfg.alpha, loss);
}

namespace {

bool trace_round(std::size_t t, std::size_t t_max) { return t == 0 || t == t_max || (t & (t - 1)) == 0; }

OverlapPoint overlap_at(std::size_t t, const std::vector<std::size_t>& tasks, const PerturbationTarget& target,
                        const std::vector<BatchIndices>& draws) {
  OverlapPoint p{t, 0, 0};
  for (std::size_t s = 0; s < tasks.size(); ++s) {
    if (tasks[s] != target.task_index) continue;
    p.u = static_cast<std::size_t>(std::count(draws[s].outer.begin(), draws[s].outer.end(), target.outer_position));
    for (std::size_t j : draws[s].inner) {
      if (std::find(target.inner_positions.begin(), target.inner_positions.end(), j) != target.inner_positions.end()) {
        ++p.v;
      }
    }
  }
  return p;
}

void check_finite(const Vector& w, std::size_t t) {
  if (!w.allFinite()) {
    throw DivergenceError("iterate became non-finite at round " + std::to_string(t), static_cast<long>(t));
  }
}

}  // namespace

TrainerOutput maml_train(const TaskCollection& collection, const TrainerConfig& cfg, const LossModel& loss) {
  cfg.validate(collection, loss);
  const int dim = collection.dim();
  const ConstraintSet set = cfg.resolved_constraint(dim);
  const double mu = loss.strong_convexity();
  const MetaConfig trace_cfg = cfg.meta();

  TrainerOutput out;
  out.rounds = cfg.t_max;
  out.beta_cap = cfg.beta_cap;
  out.mu = mu;
  out.overlap_target = cfg.overlap_target;

  Vector w = cfg.w0 ? *cfg.w0 : set.center;
  Vector sum = w;
  if (cfg.observer) cfg.observer(0, w);
  auto record_loss = [&](std::size_t t) {
    if (!cfg.record_loss || !trace_round(t, cfg.t_max)) return;
    out.loss_trace.push_back({t, stepsize(t, cfg.beta_cap, mu), empirical_objective(w, collection, trace_cfg, loss)});
  };
  record_loss(0);

  std::vector<BatchIndices> draws(cfg.r);
  Vector step = Vector::Zero(dim);
  for (std::size_t t = 0; t < cfg.t_max; ++t) {
    const double beta = stepsize(t, cfg.beta_cap, mu);
    const RoundStreams streams(cfg.seed, t);
    const std::vector<std::size_t> tasks = streams.choose_tasks(cfg.m, cfg.r);
    step.setZero();
    for (std::size_t s = 0; s < tasks.size(); ++s) {
      Stream rng = streams.batches(tasks[s], 0);
      draws[s] = round_batch(cfg, cfg.n, rng);
      step += w - beta * round_gradient(w, collection.datasets[tasks[s]], draws[s], cfg, loss);
    }
    w = project(step / static_cast<double>(tasks.size()), set);
    check_finite(w, t);
    if (cfg.record_overlap) out.overlap_trace.push_back(overlap_at(t, tasks, *cfg.overlap_target, draws));
    sum += w;
    if (cfg.observer) cfg.observer(t + 1, w);
    record_loss(t + 1);
  }
  out.last_iterate = w;
  out.averaged_iterate = sum / static_cast<double>(cfg.t_max + 1);
  return out;
}

CoupledOutput coupled_train(const TaskCollection& original, const TaskCollection& perturbed,
                            const PerturbationTarget& target, const TrainerConfig& cfg, const LossModel& loss) {
  cfg.validate(original, loss);
  cfg.validate(perturbed, loss);
  require(original.m() == perturbed.m() && original.n() == perturbed.n() && original.dim() == perturbed.dim(),
          ErrorCode::DimensionMismatch, "coupled collections must share m, n and d");
  require(target.task_index < original.m(), ErrorCode::InvalidArgument, "perturbation target out of range");
  const int dim = original.dim();
  const ConstraintSet set = cfg.resolved_constraint(dim);
  const double mu = loss.strong_convexity();

  CoupledOutput out;
  out.trace.reserve(cfg.t_max);
  Vector w = cfg.w0 ? *cfg.w0 : set.center;
  Vector v = w;
  std::vector<BatchIndices> draws(cfg.r);
  Vector step = Vector::Zero(dim);
  Vector step_tilde = Vector::Zero(dim);
  for (std::size_t t = 0; t < cfg.t_max; ++t) {
    const double beta = stepsize(t, cfg.beta_cap, mu);
    const RoundStreams streams(cfg.seed, t);
    const std::vector<std::size_t> tasks = streams.choose_tasks(cfg.m, cfg.r);
    step.setZero();
    step_tilde.setZero();
    for (std::size_t s = 0; s < tasks.size(); ++s) {
      Stream rng = streams.batches(tasks[s], 0);
      draws[s] = round_batch(cfg, cfg.n, rng);
      step += w - beta * round_gradient(w, original.datasets[tasks[s]], draws[s], cfg, loss);
      step_tilde += v - beta * round_gradient(v, perturbed.datasets[tasks[s]], draws[s], cfg, loss);
    }
    w = project(step / static_cast<double>(tasks.size()), set);
    v = project(step_tilde / static_cast<double>(tasks.size()), set);
    check_finite(w, t);
    check_finite(v, t);
    const OverlapPoint o = overlap_at(t, tasks, target, draws);
    out.trace.push_back({t, beta, (w - v).norm(), o.u, o.v});
  }
  out.divergence = (w - v).norm();
  out.w = std::move(w);
  out.w_tilde = std::move(v);
  return out;
}

OverlapSummary overlap_statistics(const TrainerOutput& output) {
  require(output.overlap_target.has_value() && (output.rounds == 0 || !output.overlap_trace.empty()),
          ErrorCode::NotRecorded, "overlap statistics were not recorded for this run");
  RunningStats u, v;
  for (const auto& p : output.overlap_trace) {
    u.add(static_cast<double>(p.u));
    v.add(static_cast<double>(p.v));
  }
  return {u.mean(), v.mean(), u.stderr_of_mean(), v.stderr_of_mean()};
}

double contraction_rate(const LossConstants& c, double alpha) {
  const double a = 2.0 * c.smooth + alpha * c.hess_lip * c.grad_bound;
  return 2.0 * c.mu * a / (16.0 * a + c.mu);
}

double divergence_recursion_bound(double d, double beta, std::size_t u, std::size_t v, const LossConstants& c,
                                  const TrainerConfig& cfg) {
  const double lambda = contraction_rate(c, cfg.alpha);
  const double r = static_cast<double>(cfg.r);
  return (1.0 - beta * lambda) * d +
         8.0 * beta * c.grad_bound *
             (static_cast<double>(u) / (r * static_cast<double>(cfg.b)) +
              cfg.alpha * c.smooth * static_cast<double>(v) / (r * static_cast<double>(cfg.k)));
}

}  // namespace metastab
