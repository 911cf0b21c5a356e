#include "core/federated.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace metastab {

FedOutput fed_train(const TaskCollection& collection, const FedConfig& cfg, const LossModel& loss) {
  cfg.validate(collection, loss);
  require(cfg.tau >= 1, ErrorCode::InvalidArgument, "local update count tau must be positive");
  const int dim = collection.dim();
  const ConstraintSet set = cfg.resolved_constraint(dim);
  const double mu = loss.strong_convexity();
  const MetaConfig trace_cfg = cfg.meta();

  FedOutput fed;
  TrainerOutput& out = fed.output;
  out.rounds = cfg.t_max;
  out.beta_cap = cfg.beta_cap;
  out.mu = mu;
  out.overlap_target = cfg.overlap_target;

  Vector w = cfg.w0 ? *cfg.w0 : set.center;
  Vector sum = w;
  if (cfg.observer) cfg.observer(0, w);
  auto record_loss = [&](std::size_t t) {
    if (!cfg.record_loss) return;
    if (t != 0 && t != cfg.t_max && (t & (t - 1)) != 0) return;
    out.loss_trace.push_back({t, stepsize(t, cfg.beta_cap, mu), empirical_objective(w, collection, trace_cfg, loss)});
  };
  record_loss(0);

  std::vector<Vector> local(cfg.r);
  std::vector<BatchIndices> first_draws(cfg.r);
  for (std::size_t t = 0; t < cfg.t_max; ++t) {
    const double beta = stepsize(t, cfg.beta_cap, mu);
    const RoundStreams streams(cfg.seed, t);
    const std::vector<std::size_t> users = streams.choose_tasks(cfg.m, cfg.r);
    auto run_user = [&](std::size_t s) {
      const std::size_t user = users[s];
      Vector v = w;
      for (std::size_t step = 0; step < cfg.tau; ++step) {
        Stream rng = streams.batches(user, step);
        const BatchIndices idx = round_batch(cfg, cfg.n, rng);
        if (step == 0) first_draws[s] = idx;
        v = project(v - beta * round_gradient(v, collection.datasets[user], idx, cfg, loss), set);
        if (!v.allFinite()) {
          throw DivergenceError("local iterate became non-finite at round " + std::to_string(t) + ", user " +
                                    std::to_string(user) + ", local step " + std::to_string(step),
                                static_cast<long>(t), static_cast<long>(user), static_cast<long>(step));
        }
      }
      local[s] = std::move(v);
    };
    // Thread start-up dominates small rounds.
    if (cfg.tau * users.size() >= 64) {
      parallel_for(users.size(), run_user);
    } else {
      for (std::size_t s = 0; s < users.size(); ++s) run_user(s);
    }
    Vector total = Vector::Zero(dim);
    for (std::size_t s = 0; s < users.size(); ++s) {
      total += local[s];
      if (cfg.verbose_trace) fed.local_trace.push_back({t, users[s], cfg.tau, beta, local[s].norm()});
    }
    w = total / static_cast<double>(users.size());
    if (!w.allFinite()) {
      throw DivergenceError("server iterate became non-finite at round " + std::to_string(t), static_cast<long>(t));
    }
    if (cfg.record_overlap) {
      OverlapPoint p{t, 0, 0};
      const auto& target = *cfg.overlap_target;
      for (std::size_t s = 0; s < users.size(); ++s) {
        if (users[s] != target.task_index) continue;
        for (std::size_t j : first_draws[s].outer) p.u += j == target.outer_position ? 1 : 0;
        for (std::size_t j : first_draws[s].inner) {
          for (std::size_t q : target.inner_positions) p.v += j == q ? 1 : 0;
        }
      }
      out.overlap_trace.push_back(p);
    }
    sum += w;
    if (cfg.observer) cfg.observer(t + 1, w);
    record_loss(t + 1);
  }
  out.last_iterate = w;
  out.averaged_iterate = sum / static_cast<double>(cfg.t_max + 1);
  return fed;
}

PersonalizationReport fed_personalization_eval(const TrainerOutput& output, const TaskCollection& collection,
                                               const MetaConfig& cfg, const LossModel& loss, std::uint64_t seed) {
  require(collection.has_specs(), ErrorCode::Unsupported, "personalization evaluation needs the task laws");
  PersonalizationReport report;
  report.per_user.resize(collection.m());
  double mean = 0.0, var = 0.0;
  const double m = static_cast<double>(collection.m());
  for (std::size_t i = 0; i < collection.m(); ++i) {
    Stream rng(seed, i, Purpose::Evaluation);
    report.per_user[i] = population_meta_loss(output.averaged_iterate, collection.specs[i], cfg, loss, rng);
    mean += report.per_user[i].mean / m;
    var += report.per_user[i].se * report.per_user[i].se / (m * m);
  }
  report.average = {mean, std::sqrt(var)};
  return report;
}

}  // namespace metastab
