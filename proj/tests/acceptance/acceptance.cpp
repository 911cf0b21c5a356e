// One PASS/FAIL line per acceptance criterion. Arguments select criteria by id (C1..C12).
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/federated.hpp"
#include "core/meta_objective.hpp"
#include "core/serialize.hpp"
#include "core/sweep.hpp"
#include "core/trainer.hpp"

using namespace metastab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

const RegularizedQuadratic kLoss(0.01);

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

Vector random_vector(int dim, Stream& rng, double scale = 1.0) {
  Vector v(dim);
  for (int j = 0; j < dim; ++j) v[j] = scale * rng.normal();
  return v;
}

/// Central-difference Jacobian of a vector field, symmetrized.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& w, double h) {
  Matrix j(w.size(), w.size());
  for (Eigen::Index c = 0; c < w.size(); ++c) {
    Vector a = w, b = w;
    a[c] += h;
    b[c] -= h;
    j.col(c) = (f(a) - f(b)) / (2 * h);
  }
  return 0.5 * (j + j.transpose().eval());
}

double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

std::vector<TaskSpec> family_laws(const FamilyRecipe& recipe, std::size_t m) {
  std::vector<TaskSpec> laws;
  for (std::size_t i = 0; i < m; ++i) laws.push_back(family_task(recipe, i));
  return laws;
}

LossConstants law_constants(const std::vector<TaskSpec>& laws, const LossModel& loss = kLoss, double radius = 10.0,
                            int probes = 10'000) {
  Stream rng(1, 0, Purpose::Constants);
  return compute_constants(loss, ConstraintSet::ball(laws.front().dim(), radius), laws, probes, rng);
}

// ---- C1 ------------------------------------------------------------------

Outcome estimator_exact() {
  Stream rng(101);
  double worst = 0.0;
  int pairs = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t k = 1; k <= std::min<std::size_t>(3, n); ++k) {
      for (std::size_t b = 1; b <= 2; ++b) {
        if (pairs == 20) break;
        FamilyRecipe recipe;
        recipe.dim = 4;
        recipe.seed = 500 + pairs;
        const TaskCollection c = generate_collection(recipe, 1, n);
        const TaskDataset& ds = c.datasets[0];
        const Vector w = random_vector(4, rng);
        Vector mean = Vector::Zero(4);
        double count = 0.0;
        const auto subsets = static_cast<std::uint64_t>(binomial(n, k));
        const std::size_t tuples = b == 1 ? n : n * n;
        for (std::uint64_t s = 0; s < subsets; ++s) {
          for (std::size_t t = 0; t < tuples; ++t) {
            BatchIndices idx;
            idx.inner = unrank_combination(s, n, k);
            idx.outer = b == 1 ? std::vector<std::size_t>{t} : std::vector<std::size_t>{t / n, t % n};
            mean += meta_gradient_for_indices(w, ds, idx, 0.1, kLoss);
            count += 1.0;
          }
        }
        mean /= count;
        MetaConfig mc;
        mc.k = k;
        mc.alpha = 0.1;
        const Vector exact = empirical_meta_gradient(w, ds, mc, kLoss).gradient;
        worst = std::max(worst, (mean - exact).norm() / std::max(1.0, exact.norm()));
        ++pairs;
      }
    }
  }
  return {pairs == 20 && worst <= 1e-12, fmt("%d (w, dataset) pairs, max scaled error %.2e (tol 1e-12)", pairs, worst)};
}

// ---- C2 ------------------------------------------------------------------

Outcome gradient_consistency() {
  FamilyRecipe recipe;
  recipe.seed = 7;
  const TaskCollection c = generate_collection(recipe, 1, 8);
  MetaConfig mc;
  mc.k = 3;
  mc.alpha = 0.1;
  Stream rng(102);
  double meta_worst = 0.0, grad_worst = 0.0, hess_worst = 0.0;
  for (int probe = 0; probe < 20; ++probe) {
    const Vector w = random_vector(10, rng);
    const Vector g = empirical_meta_gradient(w, c.datasets[0], mc, kLoss).gradient;
    Vector fd(10);
    const double h = 1e-5;
    for (int j = 0; j < 10; ++j) {
      Vector a = w, b = w;
      a[j] += h;
      b[j] -= h;
      fd[j] = (empirical_meta_loss(a, c.datasets[0], mc, kLoss).value -
               empirical_meta_loss(b, c.datasets[0], mc, kLoss).value) /
              (2 * h);
    }
    meta_worst = std::max(meta_worst, relative_error(g, fd));

    const Sample z = c.datasets[0].outer[static_cast<std::size_t>(probe) % 8];
    Vector fd_loss(10);
    for (int j = 0; j < 10; ++j) {
      Vector a = w, b = w;
      a[j] += h;
      b[j] -= h;
      fd_loss[j] = (kLoss.value(a, z) - kLoss.value(b, z)) / (2 * h);
    }
    grad_worst = std::max(grad_worst, relative_error(kLoss.gradient(w, z), fd_loss));
    const Matrix hess = kLoss.hessian(w, z);
    const Matrix fd_hess = fd_jacobian([&](const Vector& v) { return kLoss.gradient(v, z); }, w, h);
    hess_worst = std::max(hess_worst, (hess - fd_hess).norm() / hess.norm());
  }
  const bool pass = meta_worst < 1e-5 && grad_worst < 1e-5 && hess_worst < 1e-5;
  return {pass, fmt("20 probes: meta-gradient rel err %.2e, loss gradient %.2e, loss Hessian %.2e (tol 1e-5)",
                    meta_worst, grad_worst, hess_worst)};
}

// ---- C3 ------------------------------------------------------------------

Outcome overlap_statistics_check() {
  struct Case {
    std::size_t m, r, b, n, k;
  };
  const Case cases[] = {{5, 2, 3, 20, 5}, {1, 1, 10, 50, 5}, {10, 10, 1, 25, 10}};
  std::ostringstream detail;
  bool pass = true;
  for (const auto& cs : cases) {
    FamilyRecipe recipe;
    recipe.seed = 31 + cs.m;
    const TaskCollection c = generate_collection(recipe, cs.m, cs.n);
    Stream prng(cs.n);
    const PerturbedCollection p = perturb_dataset(c, cs.m - 1, cs.k, prng);
    TrainerConfig cfg;
    cfg.m = cs.m;
    cfg.n = cs.n;
    cfg.k = cs.k;
    cfg.b = cs.b;
    cfg.r = cs.r;
    cfg.t_max = 100'000;
    cfg.alpha = 0.01;
    cfg.beta_cap = 0.01;
    cfg.seed = 17;
    cfg.constraint = ConstraintSet::ball(10, 10.0);
    cfg.record_overlap = true;
    cfg.overlap_target = p.target;
    const OverlapSummary s = overlap_statistics(maml_train(c, cfg, kLoss));
    const double mn = static_cast<double>(cs.m * cs.n);
    const double eu = static_cast<double>(cs.b * cs.r) / mn;
    const double ev = static_cast<double>(cs.k * cs.k * cs.r) / mn;
    const bool ok = std::abs(s.mean_u - eu) <= 3 * s.stderr_u && std::abs(s.mean_v - ev) <= 3 * s.stderr_v;
    pass &= ok;
    detail << fmt("(m=%zu,r=%zu,b=%zu,n=%zu,K=%zu) u %.4f vs %.4f [%.1f SE], v %.4f vs %.4f [%.1f SE]; ", cs.m, cs.r,
                  cs.b, cs.n, cs.k, s.mean_u, eu, std::abs(s.mean_u - eu) / s.stderr_u, s.mean_v, ev,
                  std::abs(s.mean_v - ev) / s.stderr_v);
  }
  // Exact: K-subsets of n = 10 against a replaced set of size K = 2.
  const std::set<std::size_t> replaced{3, 7};
  double total = 0.0;
  const auto subsets = static_cast<std::uint64_t>(binomial(10, 2));
  for (std::uint64_t s = 0; s < subsets; ++s) {
    for (std::size_t j : unrank_combination(s, 10, 2)) total += replaced.count(j) ? 1.0 : 0.0;
  }
  const double exact = total / static_cast<double>(subsets);
  pass &= std::abs(exact - 0.4) < 1e-15;
  detail << fmt("enumerated E[v | task chosen] at n=10, K=2: %.15g (expected 0.4)", exact);
  return {pass, detail.str()};
}

// ---- C4 ------------------------------------------------------------------

struct StabilityRun {
  FamilyRecipe family;
  TrainerConfig cfg;
  LossConstants constants;
};

StabilityRun stability_run(std::size_t m_max, std::size_t t_max) {
  StabilityRun s;
  s.family.seed = 2024;
  s.constants = law_constants(family_laws(s.family, m_max));
  s.cfg.k = 5;
  s.cfg.b = 1;
  s.cfg.r = 0;
  s.cfg.t_max = t_max;
  s.cfg.alpha = admissible_alpha(s.constants);
  s.cfg.beta_cap = 1.0 / meta_smoothness(s.constants, s.cfg.alpha);
  s.cfg.seed = 5;
  s.cfg.constraint = ConstraintSet::ball(s.family.dim, 10.0);
  return s;
}

Outcome stability_scaling() {
  const StabilityRun s = stability_run(80, 4000);
  StabilityOptions opts;
  const std::vector<std::pair<std::size_t, std::size_t>> grid{{10, 10}, {20, 20}, {40, 40}, {80, 80}};
  const StabilityReport r = stability_grid(s.family, s.cfg, grid, 10, kLoss, s.constants, opts);
  std::ostringstream detail;
  detail << fmt("slope %.3f (target [-1.25, -0.75]); gamma_hat:", r.fitted_slope);
  for (const auto& p : r.grid) detail << fmt(" mn=%zu %.3e+-%.1e", p.m * p.n, p.gamma_hat, p.se);
  detail << fmt("; 10 trials per point, alpha %.4f, beta %.4g, T %zu", s.cfg.alpha, s.cfg.beta_cap, s.cfg.t_max);
  return {r.fitted_slope >= -1.25 && r.fitted_slope <= -0.75, detail.str()};
}

// ---- C5 ------------------------------------------------------------------

Outcome generalization_below_stability() {
  const std::vector<std::pair<std::size_t, std::size_t>> configs{{2, 10}, {5, 10}, {5, 20}, {10, 20}, {20, 20}};
  const std::size_t trials = 10;
  bool pass = true;
  std::ostringstream detail;
  for (const auto& [m, n] : configs) {
    StabilityRun s = stability_run(m, 3000);
    s.cfg.m = m;
    s.cfg.n = n;
    s.cfg.r = m;
    StabilityOptions opts;
    const StabilityReport st = estimate_stability(s.family, s.cfg, trials, kLoss, s.constants, opts);

    MetaConfig mc = s.cfg.meta();
    mc.mc_population = 20'000;
    RunningStats gap;
    for (std::size_t j = 0; j < trials; ++j) {
      FamilyRecipe recipe = s.family;
      recipe.seed = combine_keys(s.family.seed, 1000 + j);
      const TaskCollection c = generate_collection(recipe, m, n);
      TrainerConfig cfg = s.cfg;
      cfg.seed = 77 + j;
      const Vector w = maml_train(c, cfg, kLoss).last_iterate;
      gap.add(generalization_gap(w, c, mc, kLoss, 900 + j).mean);
    }
    const double limit = 3 * st.gamma_hat + 2 * gap.stderr_of_mean();
    pass &= gap.mean() <= limit;
    detail << fmt("(m=%zu,n=%zu) gap %.3e <= %.3e; ", m, n, gap.mean(), limit);
  }
  return {pass, detail.str()};
}

// ---- C6 ------------------------------------------------------------------

Outcome training_rate() {
  FamilyRecipe recipe;
  recipe.seed = 606;
  recipe.noise_var = 1.0;
  const std::size_t m = 5, n = 20;
  const TaskCollection c = generate_collection(recipe, m, n);
  // Strong regularization puts every horizon inside the decaying-step phase.
  const RegularizedQuadratic loss(1.0);
  const LossConstants k = law_constants(c.specs, loss);
  TrainerConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.k = 5;
  cfg.b = 1;
  cfg.r = 1;
  cfg.alpha = admissible_alpha(k);
  cfg.beta_cap = 1.0 / meta_smoothness(k, cfg.alpha);
  cfg.constraint = ConstraintSet::ball(10, 10.0);
  const MetaConfig mc = cfg.meta();
  QuadraticForm f = empirical_meta_quadratic(c.datasets[0], mc, loss);
  for (std::size_t i = 1; i < m; ++i) {
    const QuadraticForm g = empirical_meta_quadratic(c.datasets[i], mc, loss);
    f.hessian += g.hessian;
    f.linear += g.linear;
    f.constant += g.constant;
  }
  f.hessian /= static_cast<double>(m);
  f.linear /= static_cast<double>(m);
  f.constant /= static_cast<double>(m);
  const double best = minimize_quadratic(f, cfg.constraint, 1e-12).value;

  const std::vector<std::size_t> horizons{1000, 4000, 16000};
  const std::size_t seeds = 100;
  std::vector<double> log_t, log_sub;
  std::ostringstream detail;
  for (std::size_t t : horizons) {
    RunningStats sub;
    for (std::size_t s = 0; s < seeds; ++s) {
      cfg.t_max = t;
      cfg.seed = 1000 + s;
      sub.add(f.value(maml_train(c, cfg, loss).averaged_iterate) - best);
    }
    log_t.push_back(std::log(static_cast<double>(t)));
    log_sub.push_back(std::log(sub.mean()));
    detail << fmt("T=%zu %.3e+-%.1e; ", t, sub.mean(), sub.stderr_of_mean());
  }
  const double slope = fit_slope(log_t, log_sub);
  detail << fmt("exponent %.3f (target [-1.2, -0.8]), %zu seeds", slope, seeds);
  return {slope >= -1.2 && slope <= -0.8, detail.str()};
}

// ---- C7 ------------------------------------------------------------------

Outcome curvature_envelope() {
  FamilyRecipe recipe;
  recipe.seed = 707;
  const auto laws = family_laws(recipe, 5);
  const LossConstants c = law_constants(laws);
  const double alpha = admissible_alpha(c);
  const double top = meta_smoothness(c, alpha);
  const double tol = 1e-6 * top;
  const ConstraintSet ball = ConstraintSet::ball(10, 10.0);
  Stream rng(107);
  double low = INFINITY, high = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    const TaskSpec& t = laws[rng.below(laws.size())];
    std::vector<Sample> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(sample_point(t, rng));
    const Sample z = sample_point(t, rng);
    const Vector w = sample_in_ball(ball, rng, false);
    const Matrix h = fd_jacobian(
        [&](const Vector& v) { return meta_gradient_for_batches(v, batch_of(batch), Batch{&z}, alpha, kLoss); }, w,
        1e-4);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    low = std::min(low, eig.eigenvalues().minCoeff());
    high = std::max(high, eig.eigenvalues().maxCoeff());
  }
  const bool pass = low >= c.mu / 8 - tol && high <= top + tol;
  return {pass, fmt("100 probes, alpha %.4f: eigenvalues in [%.4g, %.4g], envelope [%.4g, %.4g]", alpha, low, high,
                    c.mu / 8, top)};
}

// ---- C8 ------------------------------------------------------------------

Outcome variance_bound() {
  FamilyRecipe recipe;
  recipe.seed = 808;
  const TaskCollection c = generate_collection(recipe, 5, 50);
  const LossConstants k = law_constants(c.specs);
  MetaConfig mc;
  mc.k = 5;
  mc.alpha = admissible_alpha(k);
  const std::size_t b = 10;
  const ConstraintSet ball = ConstraintSet::ball(10, 10.0);
  Stream rng(108);
  double max_norm = 0.0;
  std::size_t over = 0;
  for (int i = 0; i < 100'000; ++i) {
    const Vector w = sample_in_ball(ball, rng, i % 4 == 0);
    const double norm = stochastic_meta_gradient(w, c.datasets[rng.below(5)], mc, kLoss, b, rng).norm();
    max_norm = std::max(max_norm, norm);
    over += norm > 4 * k.grad_bound ? 1 : 0;
  }
  const double bound = 144 * k.grad_bound * k.grad_bound *
                       (mc.alpha * mc.alpha * k.smooth * k.smooth / static_cast<double>(mc.k) + 1.0 / b);
  double max_var = 0.0;
  for (int p = 0; p < 20; ++p) {
    const Vector w = sample_in_ball(ball, rng, p % 2 == 0);
    const TaskDataset& ds = c.datasets[static_cast<std::size_t>(p) % 5];
    std::vector<Vector> draws;
    Vector mean = Vector::Zero(10);
    for (int i = 0; i < 5000; ++i) {
      draws.push_back(stochastic_meta_gradient(w, ds, mc, kLoss, b, rng));
      mean += draws.back() / 5000.0;
    }
    double var = 0.0;
    for (const auto& g : draws) var += (g - mean).squaredNorm() / 4999.0;
    max_var = std::max(max_var, var);
  }
  const bool pass = over == 0 && max_var <= bound;
  return {pass, fmt("max ||g|| %.4g vs 4G %.4g over 1e5 draws (%zu above); max variance %.4g vs bound %.4g", max_norm,
                    4 * k.grad_bound, over, max_var, bound)};
}

// ---- C9 ------------------------------------------------------------------

TaskSpec line_law(double mean, double coeff, double cov, double noise) {
  TaskSpec t;
  t.mean = Vector::Constant(1, mean);
  t.coeff = Vector::Constant(1, coeff);
  t.feature_cov_scale = cov;
  t.noise_var = noise;
  return t;
}

Outcome tv_machinery() {
  const std::pair<TaskSpec, TaskSpec> pairs[] = {
      {line_law(0.0, 1.0, 0.2, 0.1), line_law(0.5, 1.0, 0.2, 0.1)},
      {line_law(0.0, 1.0, 0.2, 0.1), line_law(0.0, -1.0, 0.2, 0.1)},
      {line_law(0.3, 0.5, 0.2, 0.1), line_law(0.8, 0.7, 0.4, 0.05)},
      {line_law(0.0, 1.0, 0.1, 0.1), line_law(2.0, 1.0, 0.1, 0.1)},
      {line_law(0.2, 1.0, 0.2, 0.1), line_law(0.25, 1.05, 0.22, 0.11)},
  };
  double mc_worst = 0.0, coupling_worst = 0.0;
  std::ostringstream detail;
  std::size_t index = 0;
  for (const auto& [p, q] : pairs) {
    Stream rng(109, index++, Purpose::TotalVariation);
    const double oracle = tv_distance(p, q, TvMethod::Numeric1D, 0, rng).mean;
    const Estimate mc = tv_distance(p, q, TvMethod::MonteCarlo, 1'000'000, rng);
    mc_worst = std::max(mc_worst, std::abs(mc.mean - oracle));
    int differ = 0;
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i) differ += maximal_coupling_sample(p, q, rng).coupled ? 0 : 1;
    coupling_worst = std::max(coupling_worst, std::abs(static_cast<double>(differ) / draws - oracle));
    detail << fmt("%.4f ", oracle);
  }
  const bool pass = mc_worst <= 0.005 && coupling_worst <= 0.01;
  return {pass, fmt("oracle TVs [ %s]; max |MC - oracle| %.4f (tol 0.005); max |coupling - oracle| %.4f (tol 0.01)",
                    detail.str().c_str(), mc_worst, coupling_worst)};
}

// ---- C10 -----------------------------------------------------------------

Outcome shift_bound_check() {
  FamilyRecipe recipe;
  recipe.seed = 1010;
  const std::size_t m = 5;
  const TaskCollection seen = generate_collection(recipe, m, 50);
  const TaskSpec similar = family_task(recipe, 1'000'001, TaskMode::Similar);
  const TaskSpec dissimilar = family_task(recipe, 1'000'002, TaskMode::Dissimilar);
  std::vector<TaskSpec> laws = seen.specs;
  laws.push_back(similar);
  laws.push_back(dissimilar);
  const LossConstants k = law_constants(laws);
  MetaConfig mc;
  mc.k = 5;
  mc.alpha = admissible_alpha(k);
  mc.mc_population = 20'000;
  const ConstraintSet ball = ConstraintSet::ball(10, 10.0);
  bool pass = true;
  std::ostringstream detail;
  for (const auto& [name, unseen] : {std::pair{"similar", similar}, std::pair{"dissimilar", dissimilar}}) {
    ShiftOptions opts;
    opts.m = m;
    opts.n = 50;
    opts.seed = 3;
    const ShiftReport shift = shift_bound(unseen, seen.specs, k, mc.alpha, opts);
    Stream rng(110);
    double worst_ratio = 0.0;
    for (int p = 0; p < 20; ++p) {
      const Vector w = sample_in_ball(ball, rng, p % 2 == 0);
      const ExcessLoss e = excess_loss_new_task(w, unseen, seen, mc, kLoss, shift, 50 + p);
      pass &= e.excess.mean <= shift.d_bound + 2 * e.excess.se;
      worst_ratio = std::max(worst_ratio, e.excess.mean / (shift.d_bound + 2 * e.excess.se));
    }
    detail << fmt("%s: TV to mixture %.3f, d_bound %.4g, worst excess/limit %.3g; ", name, shift.tv_to_mixture.mean,
                  shift.d_bound, worst_ratio);
  }
  return {pass, detail.str()};
}

// ---- C11 -----------------------------------------------------------------

Outcome figure_trends() {
  SweepConfig cfg;
  const SweepResult r = run_sweep(cfg);
  const SweepCell& small = r.cell(FigureKind::Recurring, 1, 25);
  const SweepCell& large = r.cell(FigureKind::Recurring, 20, 200);
  const bool a = small.mean - 2 * small.se > large.mean + 2 * large.se;
  const TrendEstimate& sm = r.trend(FigureKind::NewSimilar, "m");
  const TrendEstimate& sn = r.trend(FigureKind::NewSimilar, "n");
  const bool b = sm.slope + 2 * sm.se < 0.0 && std::abs(sn.slope) < 2 * sn.se;
  const TrendEstimate& dm = r.trend(FigureKind::NewDissimilar, "m");
  const TrendEstimate& dn = r.trend(FigureKind::NewDissimilar, "n");
  const bool c = dm.slope + 2 * dm.se >= 0.0 && dn.slope + 2 * dn.se >= 0.0;
  return {a && b && c,
          fmt("(a) recurring %.4g+-%.2g at (1,25) vs %.4g+-%.2g at (20,200) %s; (b) similar m-slope %.3g+-%.2g, "
              "n-slope %.3g+-%.2g %s; (c) dissimilar m-slope %.3g+-%.2g, n-slope %.3g+-%.2g %s",
              small.mean, small.se, large.mean, large.se, a ? "ok" : "FAIL", sm.slope, sm.se, sn.slope, sn.se,
              b ? "ok" : "FAIL", dm.slope, dm.se, dn.slope, dn.se, c ? "ok" : "FAIL")};
}

// ---- C12 -----------------------------------------------------------------

Outcome federated_equivalence() {
  FamilyRecipe recipe;
  recipe.seed = 1212;
  const TaskCollection c = generate_collection(recipe, 6, 30);
  std::ostringstream detail;
  bool pass = true;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    FedConfig cfg;
    cfg.m = 6;
    cfg.n = 30;
    cfg.k = 5;
    cfg.b = 10;
    cfg.r = 3;
    cfg.t_max = 2000;
    cfg.alpha = 0.1;
    cfg.beta_cap = 0.01;
    cfg.seed = seed;
    cfg.tau = 1;
    cfg.constraint = ConstraintSet::unbounded(10);
    const std::string a = output_hash(maml_train(c, cfg, kLoss));
    const std::string b = output_hash(fed_train(c, cfg, kLoss).output);
    pass &= a == b;
    detail << fmt("seed %llu %s %s; ", static_cast<unsigned long long>(seed), a.substr(0, 12).c_str(),
                  a == b ? "==" : "!=");
  }
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"C1", "estimator-exactness", 10, estimator_exact},
      {"C2", "gradient-consistency", 10, gradient_consistency},
      {"C3", "batch-overlap", 120, overlap_statistics_check},
      {"C4", "stability-scaling", 1800, stability_scaling},
      {"C5", "generalization-vs-stability", 900, generalization_below_stability},
      {"C6", "training-rate", 600, training_rate},
      {"C7", "curvature-envelope", 60, curvature_envelope},
      {"C8", "variance-bound", 60, variance_bound},
      {"C9", "tv-machinery", 120, tv_machinery},
      {"C10", "shift-bound", 600, shift_bound_check},
      {"C11", "figure-trends", 1800, figure_trends},
      {"C12", "federated-equivalence", 60, federated_equivalence},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %s %s [%.1fs of %.0fs%s]: %s\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds, c.budget_seconds,
                in_time ? "" : ", over budget", out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
