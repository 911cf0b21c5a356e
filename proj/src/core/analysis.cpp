#include "core/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace metastab {

void check_stability_premise(const TrainerConfig& cfg, const LossConstants& c) {
  const double limit = 1.0 / meta_smoothness(c, cfg.alpha);
  if (cfg.beta_cap > limit * (1.0 + 1e-12)) {
    fail(ErrorCode::Premise, "stability analysis needs beta <= 1/(4L + 2 alpha rho G) = " + std::to_string(limit) +
                                 ", got " + std::to_string(cfg.beta_cap));
  }
}

namespace {

double adapted_probe_loss(const Vector& w, const Batch& inner, const Sample& z, double alpha, const LossModel& loss) {
  return loss.value(adapt(w, inner, alpha, loss), z);
}

StabilityTrial run_trial(const FamilyRecipe& family, const TrainerConfig& cfg, std::size_t trial,
                         const LossModel& loss, const LossConstants& c, const StabilityOptions& options) {
  const std::uint64_t seed = combine_keys(cfg.seed, trial);
  FamilyRecipe recipe = family;
  recipe.seed = combine_keys(family.seed, trial);
  const TaskCollection collection = generate_collection(recipe, cfg.m, cfg.n);

  Stream prng(seed, 0, Purpose::Perturbation);
  const std::size_t task = static_cast<std::size_t>(prng.below(cfg.m));
  const std::size_t k = options.perturb_k.value_or(cfg.k);
  TaskCollection perturbed = collection;
  PerturbationTarget target{task, {}, cfg.n};
  if (k > 0) {
    PerturbedCollection p = perturb_dataset(collection, task, k, prng);
    perturbed = std::move(p.collection);
    target = std::move(p.target);
  }

  TrainerConfig tc = cfg;
  tc.seed = seed;
  tc.record_overlap = false;
  tc.observer = nullptr;
  const CoupledOutput run = coupled_train(collection, perturbed, target, tc, loss);

  Stream probe(seed, 0, Purpose::Probes);
  std::vector<Sample> inner(cfg.k);
  Batch view;
  for (const auto& s : inner) view.push_back(&s);
  double worst = 0.0;
  for (std::size_t p = 0; p < options.probes; ++p) {
    TaskSpec law = collection.specs[probe.below(cfg.m)];
    law.feature_cov_scale *= options.envelope_widen;
    for (auto& s : inner) s = sample_point(law, probe);
    const Sample z = sample_point(law, probe);
    const double diff = std::abs(adapted_probe_loss(run.w, view, z, cfg.alpha, loss) -
                                 adapted_probe_loss(run.w_tilde, view, z, cfg.alpha, loss));
    worst = std::max(worst, diff);
  }

  StabilityTrial out;
  out.task_index = task;
  out.max_difference = worst;
  out.divergence = run.divergence;
  out.chain_ok = worst <= 8.0 * c.grad_bound * run.divergence + 1e-12;
  return out;
}

}  // namespace

StabilityReport estimate_stability(const FamilyRecipe& family, const TrainerConfig& cfg, std::size_t trials,
                                   const LossModel& loss, const LossConstants& c, const StabilityOptions& options) {
  require(trials >= 1, ErrorCode::InvalidArgument, "stability estimation needs at least one trial");
  require(options.probes >= 1, ErrorCode::InvalidArgument, "stability estimation needs at least one probe");
  require(cfg.r >= 1 && cfg.r <= cfg.m, ErrorCode::InvalidArgument, "tasks per round r must satisfy 1 <= r <= m");
  check_stability_premise(cfg, c);

  StabilityReport report;
  report.trials.resize(trials);
  parallel_for(trials, [&](std::size_t j) { report.trials[j] = run_trial(family, cfg, j, loss, c, options); });

  RunningStats gamma, divergence;
  for (const auto& t : report.trials) {
    gamma.add(t.max_difference);
    divergence.add(t.divergence);
  }
  report.gamma_hat = gamma.mean();
  report.gamma_se = gamma.stderr_of_mean();
  report.gamma_theory = theoretical_gamma(c, cfg.m, cfg.n, cfg.k, cfg.alpha, options.leading_const);
  report.grid.push_back({cfg.m, cfg.n, report.gamma_hat, report.gamma_se, divergence.mean(), report.gamma_theory});
  report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
  return report;
}

StabilityReport stability_grid(const FamilyRecipe& family, const TrainerConfig& base,
                               const std::vector<std::pair<std::size_t, std::size_t>>& grid, std::size_t trials,
                               const LossModel& loss, const LossConstants& c, const StabilityOptions& options) {
  require(!grid.empty(), ErrorCode::InvalidArgument, "stability grid is empty");
  StabilityReport report;
  std::vector<double> log_mn, log_gamma;
  for (const auto& [m, n] : grid) {
    TrainerConfig cfg = base;
    cfg.m = m;
    cfg.n = n;
    // r = 0 means every task participates in every round.
    cfg.r = base.r == 0 ? m : std::min(base.r, m);
    const StabilityReport point = estimate_stability(family, cfg, trials, loss, c, options);
    report.grid.push_back(point.grid.front());
    report.trials.insert(report.trials.end(), point.trials.begin(), point.trials.end());
    log_mn.push_back(std::log(static_cast<double>(m * n)));
    log_gamma.push_back(std::log(point.gamma_hat));
  }
  report.gamma_hat = report.grid.back().gamma_hat;
  report.gamma_se = report.grid.back().se;
  report.gamma_theory = report.grid.back().gamma_theory;
  report.fitted_slope = grid.size() >= 2 ? fit_slope(log_mn, log_gamma) : std::numeric_limits<double>::quiet_NaN();
  return report;
}

double theoretical_gamma(const LossConstants& c, std::size_t m, std::size_t n, std::size_t k, double alpha,
                         double leading_const) {
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  return leading_const * c.grad_bound * c.grad_bound * (1.0 + alpha * c.smooth * static_cast<double>(k)) /
         (mn * c.mu);
}

double largek_gamma(const LossConstants& c, std::size_t m, std::size_t n, std::size_t k, double alpha,
                    double leading_const) {
  const double mn_mu = static_cast<double>(m) * static_cast<double>(n) * c.mu;
  const double kk = static_cast<double>(k);
  const double branch = std::min(c.smooth * kk / mn_mu, 1.0 / std::sqrt(kk));
  return leading_const * c.grad_bound * c.grad_bound * (1.0 / mn_mu + alpha * branch);
}

double largek_crossover(const LossConstants& c, std::size_t m, std::size_t n) {
  const double mn_mu = static_cast<double>(m) * static_cast<double>(n) * c.mu;
  return std::pow(mn_mu / c.smooth, 2.0 / 3.0);
}

Estimate generalization_gap(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                            const LossModel& loss, std::uint64_t seed) {
  require(collection.has_specs(), ErrorCode::Unsupported, "population evaluation needs the task laws");
  const double m = static_cast<double>(collection.m());
  double population = 0.0, var = 0.0;
  for (std::size_t i = 0; i < collection.m(); ++i) {
    Stream rng(seed, i, Purpose::Evaluation);
    const Estimate e = population_meta_loss(w, collection.specs[i], cfg, loss, rng);
    population += e.mean / m;
    var += e.se * e.se / (m * m);
  }
  return {population - empirical_objective(w, collection, cfg, loss), std::sqrt(var)};
}

// ---- total variation -------------------------------------------------------

namespace {

void check_tv_laws(const TaskSpec& p, const TaskSpec& q) {
  require(p.dim() == q.dim(), ErrorCode::DimensionMismatch, "TV laws must share the dimension");
  require(has_joint_density(p) && has_joint_density(q), ErrorCode::Unsupported,
          "TV estimation needs non-degenerate Gaussian laws");
}

double log_sum_exp(std::span<const double> logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (double l : logs) total += std::exp(l - top);
  return top + std::log(total);
}

/// Integral over y of |A N(y; m1, v1) - B N(y; m2, v2)|.
double inner_abs_difference(double log_a, double m1, double v1, double log_b, double m2, double v2) {
  if (!std::isfinite(log_a) && !std::isfinite(log_b)) return 0.0;
  if (!std::isfinite(log_a)) return std::exp(log_b);
  if (!std::isfinite(log_b)) return std::exp(log_a);
  const double c2 = -0.5 / v1 + 0.5 / v2;
  const double c1 = m1 / v1 - m2 / v2;
  const double c0 = log_a - log_b - 0.5 * std::log(v1 / v2) - 0.5 * m1 * m1 / v1 + 0.5 * m2 * m2 / v2;
  std::vector<double> cuts;
  if (c2 == 0.0) {
    if (c1 != 0.0) cuts.push_back(-c0 / c1);
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc > 0.0) {
      const double s = std::sqrt(disc);
      // Numerically stable quadratic roots.
      const double qv = -0.5 * (c1 + std::copysign(s, c1));
      if (qv != 0.0) {
        cuts.push_back(qv / c2);
        cuts.push_back(c0 / qv);
      } else {
        cuts.push_back(-c1 / (2.0 * c2));
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  const boost::math::normal_distribution<double> n1(m1, std::sqrt(v1));
  const boost::math::normal_distribution<double> n2(m2, std::sqrt(v2));
  const double a = std::exp(log_a);
  const double b = std::exp(log_b);
  auto mass = [&](const boost::math::normal_distribution<double>& d, double lo, double hi) {
    const double clo = std::isfinite(lo) ? boost::math::cdf(d, lo) : 0.0;
    const double chi = std::isfinite(hi) ? boost::math::cdf(d, hi) : 1.0;
    // Upper tails via the complement keep precision far from the mean.
    if (std::isfinite(lo) && lo > d.mean()) {
      const double tlo = boost::math::cdf(boost::math::complement(d, lo));
      const double thi = std::isfinite(hi) ? boost::math::cdf(boost::math::complement(d, hi)) : 0.0;
      return tlo - thi;
    }
    return chi - clo;
  };
  double total = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= cuts.size(); ++j) {
    const double hi = j < cuts.size() ? cuts[j] : std::numeric_limits<double>::infinity();
    total += std::abs(a * mass(n1, lo, hi) - b * mass(n2, lo, hi));
    lo = hi;
  }
  return total;
}

double tv_numeric_1d(const TaskSpec& p, const TaskSpec& q) {
  require(p.dim() == 1, ErrorCode::Unsupported, "one-dimensional quadrature needs d = 1");
  const double mp = p.mean[0], mq = q.mean[0];
  const double sp = p.feature_cov_scale, sq = q.feature_cov_scale;
  const double ap = p.coeff[0], aq = q.coeff[0];
  constexpr double log_two_pi = 1.8378770664093454835606594728112;
  auto log_normal = [&](double x, double mean, double var) {
    return -0.5 * (x - mean) * (x - mean) / var - 0.5 * (log_two_pi + std::log(var));
  };
  auto integrand = [&](double x) {
    return inner_abs_difference(log_normal(x, mp, sp), ap * x, p.noise_var, log_normal(x, mq, sq), aq * x,
                                q.noise_var);
  };
  const double dp = std::sqrt(sp), dq = std::sqrt(sq);
  const double lo = std::min(mp - 40.0 * dp, mq - 40.0 * dq);
  const double hi = std::max(mp + 40.0 * dp, mq + 40.0 * dq);
  std::vector<double> breaks{lo, hi};
  for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
    breaks.push_back(mp + k * dp);
    breaks.push_back(mq + k * dq);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    if (breaks[j] < lo || breaks[j + 1] > hi) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, breaks[j], breaks[j + 1], 15,
                                                                          1e-12);
  }
  return std::clamp(0.5 * total, 0.0, 1.0);
}

}  // namespace

Estimate tv_distance(const TaskSpec& p, const TaskSpec& q, TvMethod method, std::size_t samples, Stream& rng) {
  check_tv_laws(p, q);
  if (method == TvMethod::Numeric1D) return {tv_numeric_1d(p, q), 0.0};
  require(samples >= 2, ErrorCode::InvalidArgument, "Monte Carlo TV needs at least two samples");
  if (p == q) return {0.0, 0.0};
  const std::vector<TaskSpec> components{q};
  return tv_to_mixture(p, components, {}, samples, rng);
}

Estimate tv_to_mixture(const TaskSpec& p, const std::vector<TaskSpec>& components, std::span<const double> weights,
                       std::size_t samples, Stream& rng) {
  require(!components.empty(), ErrorCode::InvalidArgument, "mixture needs at least one component");
  for (const auto& q : components) check_tv_laws(p, q);
  require(weights.empty() || weights.size() == components.size(), ErrorCode::InvalidWeights,
          "mixture weights must match the components");
  std::vector<double> log_w(components.size(), -std::log(static_cast<double>(components.size())));
  if (!weights.empty()) {
    double total = 0.0;
    for (double w : weights) {
      require(w >= 0.0, ErrorCode::InvalidWeights, "mixture weights must be nonnegative");
      total += w;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidWeights, "mixture weights must sum to 1");
    for (std::size_t i = 0; i < weights.size(); ++i) log_w[i] = std::log(weights[i]);
  }
  const Stream base(rng.next_u64());
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<RunningStats> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Stream local = base.derive(c);
    std::vector<double> terms(components.size());
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t j = c * chunk; j < end; ++j) {
      const Sample z = sample_point(p, local);
      const double log_p = joint_log_density(p, z.x, z.y);
      for (std::size_t i = 0; i < components.size(); ++i) {
        terms[i] = log_w[i] + joint_log_density(components[i], z.x, z.y);
      }
      const double ratio = std::exp(log_sum_exp(terms) - log_p);
      partial[c].add(std::max(0.0, 1.0 - ratio));
    }
  });
  RunningStats total;
  for (const auto& s : partial) total.merge(s);
  return total.estimate();
}

double tv_equal_variance_normals(double m1, double m2, double variance) {
  const boost::math::normal_distribution<double> standard;
  return 2.0 * boost::math::cdf(standard, std::abs(m1 - m2) / (2.0 * std::sqrt(variance))) - 1.0;
}

double d_bound_value(std::span<const double> tv_pairwise, double tv_mixture, const LossConstants& c, double alpha) {
  require(!tv_pairwise.empty(), ErrorCode::InvalidArgument, "shift bound needs at least one seen task");
  const double g2 = c.grad_bound * c.grad_bound;
  double sum = 0.0;
  for (double tv : tv_pairwise) sum += tv;
  return 4.0 * alpha * g2 / static_cast<double>(tv_pairwise.size()) * sum +
         (c.value_bound + 2.0 * alpha * g2) * tv_mixture;
}

double weighted_d_bound_value(std::span<const double> tv_pairwise, double tv_weighted_mixture,
                              std::span<const double> weights, const LossConstants& c, double alpha) {
  require(weights.size() == tv_pairwise.size(), ErrorCode::InvalidWeights, "weights must match the seen tasks");
  const double g2 = c.grad_bound * c.grad_bound;
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) sum += weights[i] * tv_pairwise[i];
  return (c.value_bound + 2.0 * alpha * g2) * tv_weighted_mixture + 12.0 * alpha * g2 * sum;
}

ShiftReport shift_bound(const TaskSpec& unseen, const std::vector<TaskSpec>& seen, const LossConstants& c, double alpha,
                        const ShiftOptions& options) {
  require(!seen.empty(), ErrorCode::InvalidArgument, "shift bound needs at least one seen task");
  ShiftReport report;
  std::vector<double> pairwise;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    Stream rng(options.seed, i, Purpose::TotalVariation);
    report.tv_pairwise.push_back(tv_distance(unseen, seen[i], TvMethod::MonteCarlo, options.tv_samples, rng));
    pairwise.push_back(report.tv_pairwise.back().mean);
  }
  Stream mix_rng(options.seed, seen.size(), Purpose::TotalVariation);
  bool all_equal = std::all_of(seen.begin(), seen.end(), [&](const TaskSpec& s) { return s == unseen; });
  report.tv_to_mixture =
      all_equal ? Estimate{0.0, 0.0} : tv_to_mixture(unseen, seen, {}, options.tv_samples, mix_rng);
  report.d_bound = d_bound_value(pairwise, report.tv_to_mixture.mean, c, alpha);
  if (!options.weights.empty()) {
    Stream wrng(options.seed, seen.size() + 1, Purpose::TotalVariation);
    report.tv_to_weighted_mixture =
        all_equal ? Estimate{0.0, 0.0} : tv_to_mixture(unseen, seen, options.weights, options.tv_samples, wrng);
    report.weighted_d_bound =
        weighted_d_bound_value(pairwise, report.tv_to_weighted_mixture->mean, options.weights, c, alpha);
  }
  const std::size_t m = options.m > 0 ? options.m : seen.size();
  const std::size_t n = options.n > 0 ? options.n : 1;
  report.largek_gamma = largek_gamma(c, m, n, options.k, alpha, options.leading_const);
  report.constants_note = "uniform bound uses 4*alpha*G^2 on the pairwise term; weighted bound uses 12*alpha*G^2";
  return report;
}

double mixture_generalization_bound(double d_unseen, std::span<const double> per_seen_d, double pi_unseen,
                                    std::span<const double> pi_seen) {
  require(per_seen_d.size() == pi_seen.size() && !pi_seen.empty(), ErrorCode::InvalidWeights,
          "task probabilities must match the seen tasks");
  double total = pi_unseen;
  require(pi_unseen >= 0.0 && pi_unseen <= 1.0, ErrorCode::InvalidWeights, "probabilities must lie in [0, 1]");
  for (double p : pi_seen) {
    require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidWeights, "probabilities must lie in [0, 1]");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidWeights, "task probabilities must sum to 1");
  const double m = static_cast<double>(pi_seen.size());
  double seen_term = 0.0;
  for (std::size_t i = 0; i < pi_seen.size(); ++i) seen_term += std::abs(pi_seen[i] - 1.0 / m) * per_seen_d[i];
  return pi_unseen * d_unseen + (1.0 - pi_unseen) * seen_term;
}

ExcessLoss excess_loss_new_task(const Vector& w, const TaskSpec& unseen, const TaskCollection& seen,
                                const MetaConfig& cfg, const LossModel& loss, const ShiftReport& shift,
                                std::uint64_t seed, std::optional<double> training_excess) {
  require(seen.has_specs(), ErrorCode::Unsupported, "population evaluation needs the task laws");
  const double m = static_cast<double>(seen.m());
  double f_seen = 0.0, var_seen = 0.0;
  for (std::size_t i = 0; i < seen.m(); ++i) {
    Stream rng(seed, i, Purpose::Evaluation);
    const Estimate e = population_meta_loss(w, seen.specs[i], cfg, loss, rng);
    f_seen += e.mean / m;
    var_seen += e.se * e.se / (m * m);
  }
  Stream rng(seed, seen.m(), Purpose::Evaluation);
  const Estimate f_new = population_meta_loss(w, unseen, cfg, loss, rng);
  ExcessLoss out;
  out.excess = {std::abs(f_new.mean - f_seen), std::sqrt(var_seen + f_new.se * f_new.se)};
  out.bound = shift.d_bound;
  if (training_excess) out.composite = *training_excess + 2.0 * shift.d_bound;
  return out;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument, "slope fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  require(sxx > 0.0, ErrorCode::InvalidArgument, "slope fit needs distinct abscissae");
  return sxy / sxx;
}

ConvergenceReport convergence_report(const std::vector<SuboptimalityPoint>& points, const LossConstants& c,
                                     double alpha, double beta_cap) {
  require(points.size() >= 3, ErrorCode::InvalidArgument, "rate fits need at least three grid points");
  std::vector<double> log_t, log_avg, log_last, avg_shape, last_shape;
  const double g2 = c.grad_bound * c.grad_bound;
  for (const auto& p : points) {
    require(p.t >= 2 && p.averaged > 0.0 && p.last > 0.0, ErrorCode::InvalidArgument,
            "suboptimality values must be positive");
    const double t = static_cast<double>(p.t);
    log_t.push_back(std::log(t));
    log_avg.push_back(std::log(p.averaged));
    log_last.push_back(std::log(p.last));
    avg_shape.push_back(g2 * (std::log(t) + 1.0 / (beta_cap * c.mu)) / (c.mu * t));
    last_shape.push_back((c.smooth + c.hess_lip * alpha * c.grad_bound) / t + c.grad_bound / std::sqrt(t));
  }
  ConvergenceReport report;
  report.averaged_exponent = fit_slope(log_t, log_avg);
  report.last_exponent = fit_slope(log_t, log_last);
  const double c_avg = points.front().averaged / avg_shape.front();
  const double c_last = points.front().last / last_shape.front();
  report.averaged_bound_ok = true;
  report.last_bound_ok = true;
  for (std::size_t j = 0; j < points.size(); ++j) {
    report.averaged_bound_ok &= points[j].averaged <= c_avg * avg_shape[j] * (1.0 + 1e-12);
    report.last_bound_ok &= points[j].last <= c_last * last_shape[j] * (1.0 + 1e-12);
  }
  return report;
}

}  // namespace metastab
