#include "core/meta_objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace metastab {

namespace {

constexpr std::size_t kChunk = 1024;

struct SubsetPlan {
  std::size_t n = 0;
  std::size_t k = 0;
  bool exact = true;
  std::uint64_t count = 0;
  std::uint64_t key = 0;

  std::size_t chunks() const { return static_cast<std::size_t>((count + kChunk - 1) / kChunk); }
};

SubsetPlan plan_subsets(std::size_t n, const MetaConfig& cfg) {
  cfg.validate(n);
  SubsetPlan plan;
  plan.n = n;
  plan.k = cfg.k;
  const double total = binomial(n, cfg.k);
  plan.exact = total <= static_cast<double>(cfg.enumeration_cap);
  plan.count = plan.exact ? static_cast<std::uint64_t>(total) : cfg.mc_subsets;
  plan.key = combine_keys(combine_keys(cfg.subset_seed, n), cfg.k);
  return plan;
}

bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

template <class Fn>
void visit_chunk(const SubsetPlan& plan, std::size_t chunk, Fn&& fn) {
  const std::uint64_t begin = static_cast<std::uint64_t>(chunk) * kChunk;
  const std::uint64_t end = std::min<std::uint64_t>(plan.count, begin + kChunk);
  if (plan.exact) {
    std::vector<std::size_t> c = unrank_combination(begin, plan.n, plan.k);
    for (std::uint64_t r = begin; r < end; ++r) {
      fn(c);
      if (r + 1 < end) next_combination(c, plan.n);
    }
  } else {
    Stream rng = Stream(plan.key).derive(chunk);
    for (std::uint64_t r = begin; r < end; ++r) fn(sample_distinct(plan.n, plan.k, rng));
  }
}

Batch select(const std::vector<Sample>& pool, const std::vector<std::size_t>& idx) {
  Batch batch;
  batch.reserve(idx.size());
  for (std::size_t j : idx) batch.push_back(&pool[j]);
  return batch;
}

void check_weights(std::span<const double> weights, std::size_t count) {
  if (weights.empty()) return;
  require(weights.size() == count, ErrorCode::InvalidWeights, "weight vector length must equal the number of tasks");
  double total = 0.0;
  for (double q : weights) {
    require(q >= 0.0 && std::isfinite(q), ErrorCode::InvalidWeights, "weights must be nonnegative");
    total += q;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidWeights, "weights must sum to 1 within 1e-9");
}

}  // namespace

void MetaConfig::validate(std::size_t n) const {
  require(alpha >= 0.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be finite and nonnegative");
  require(k >= 1 && k <= n, ErrorCode::InvalidArgument, "adaptation batch size K must satisfy 1 <= K <= n");
  require(enumeration_cap >= 1 && mc_subsets >= 1 && mc_population >= 1, ErrorCode::InvalidArgument,
          "Monte Carlo sizes must be positive");
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (std::size_t j = 1; j <= k; ++j) result = result * static_cast<double>(n - k + j) / static_cast<double>(j);
  return std::round(result);
}

std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k) {
  std::vector<std::size_t> c;
  c.reserve(k);
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < k; ++slot) {
    for (std::size_t v = next; v < n; ++v) {
      const auto block = static_cast<std::uint64_t>(binomial(n - v - 1, k - slot - 1));
      if (rank < block) {
        c.push_back(v);
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  require(c.size() == k, ErrorCode::InvalidArgument, "combination rank out of range");
  return c;
}

std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Stream& rng) {
  require(k <= n, ErrorCode::InvalidArgument, "cannot draw more distinct items than available");
  // Floyd's algorithm keeps the cost O(k) without materializing 0..n-1.
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::size_t>(rng.below(j + 1));
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
  return out;
}

double adapted_batch_loss(const Vector& w, const Batch& inner, const Batch& outer, double alpha,
                          const LossModel& loss) {
  return loss.mean_value(adapt(w, inner, alpha, loss), outer);
}

Vector meta_gradient_for_batches(const Vector& w, const Batch& inner, const Batch& outer, double alpha,
                                 const LossModel& loss) {
  const Vector adapted = adapt(w, inner, alpha, loss);
  const Vector outer_grad = loss.mean_gradient(adapted, outer);
  if (alpha == 0.0) return outer_grad;
  const Matrix h = loss.mean_hessian(w, inner);
  return outer_grad - alpha * (h * outer_grad);
}

MetaValue empirical_meta_loss(const Vector& w, const TaskDataset& dataset, const MetaConfig& cfg,
                              const LossModel& loss) {
  const SubsetPlan plan = plan_subsets(dataset.n(), cfg);
  const Batch outer = batch_of(dataset.outer);
  std::vector<double> partial(plan.chunks(), 0.0);
  parallel_for(partial.size(), [&](std::size_t c) {
    double sum = 0.0;
    visit_chunk(plan, c, [&](const std::vector<std::size_t>& idx) {
      sum += adapted_batch_loss(w, select(dataset.inner, idx), outer, cfg.alpha, loss);
    });
    partial[c] = sum;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return {total / static_cast<double>(plan.count), plan.exact, static_cast<std::size_t>(plan.count)};
}

MetaGradient empirical_meta_gradient(const Vector& w, const TaskDataset& dataset, const MetaConfig& cfg,
                                     const LossModel& loss) {
  const SubsetPlan plan = plan_subsets(dataset.n(), cfg);
  const Batch outer = batch_of(dataset.outer);
  std::vector<Vector> partial(plan.chunks(), Vector::Zero(w.size()));
  parallel_for(partial.size(), [&](std::size_t c) {
    visit_chunk(plan, c, [&](const std::vector<std::size_t>& idx) {
      partial[c] += meta_gradient_for_batches(w, select(dataset.inner, idx), outer, cfg.alpha, loss);
    });
  });
  Vector total = Vector::Zero(w.size());
  for (const auto& p : partial) total += p;
  return {total / static_cast<double>(plan.count), plan.exact, static_cast<std::size_t>(plan.count)};
}

BatchIndices draw_batch_indices(std::size_t n, std::size_t k, std::size_t b, Stream& rng) {
  require(b >= 1, ErrorCode::InvalidArgument, "outer batch size b must be positive");
  require(k >= 1 && k <= n, ErrorCode::InvalidArgument, "adaptation batch size K must satisfy 1 <= K <= n");
  BatchIndices idx;
  idx.inner = sample_distinct(n, k, rng);
  idx.outer.resize(b);
  for (auto& j : idx.outer) j = static_cast<std::size_t>(rng.below(n));
  return idx;
}

Vector meta_gradient_for_indices(const Vector& w, const TaskDataset& dataset, const BatchIndices& idx,
                                 double alpha, const LossModel& loss) {
  return meta_gradient_for_batches(w, select(dataset.inner, idx.inner), select(dataset.outer, idx.outer), alpha,
                                   loss);
}

Vector stochastic_meta_gradient(const Vector& w, const TaskDataset& dataset, const MetaConfig& cfg,
                                const LossModel& loss, std::size_t b, Stream& rng) {
  cfg.validate(dataset.n());
  const BatchIndices idx = draw_batch_indices(dataset.n(), cfg.k, b, rng);
  return meta_gradient_for_indices(w, dataset, idx, cfg.alpha, loss);
}

namespace {

/// Per-draw adapted losses at several points, sharing the (K-batch, z) draws.
std::vector<RunningStats> population_draws(std::span<const Vector> points, const TaskSpec& task,
                                           const MetaConfig& cfg, const LossModel& loss, Stream& rng,
                                           bool with_difference) {
  require(cfg.k >= 1 && cfg.mc_population >= 1, ErrorCode::InvalidArgument, "invalid Monte Carlo configuration");
  const Stream base(rng.next_u64());
  const std::size_t draws = cfg.mc_population;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  const std::size_t slots = points.size() + (with_difference ? 1 : 0);
  std::vector<std::vector<RunningStats>> partial(chunks, std::vector<RunningStats>(slots));
  parallel_for(chunks, [&](std::size_t c) {
    Stream local = base.derive(c);
    const std::size_t end = std::min(draws, (c + 1) * kChunk);
    std::vector<Sample> batch(cfg.k);
    Batch view;
    for (const auto& s : batch) view.push_back(&s);
    std::vector<double> vals(points.size());
    for (std::size_t j = c * kChunk; j < end; ++j) {
      for (auto& s : batch) s = sample_point(task, local);
      const Sample z = sample_point(task, local);
      for (std::size_t p = 0; p < points.size(); ++p) {
        vals[p] = loss.value(adapt(points[p], view, cfg.alpha, loss), z);
        partial[c][p].add(vals[p]);
      }
      if (with_difference) partial[c][points.size()].add(vals[0] - vals[1]);
    }
  });
  std::vector<RunningStats> total(slots);
  for (const auto& chunk : partial) {
    for (std::size_t s = 0; s < slots; ++s) total[s].merge(chunk[s]);
  }
  return total;
}

}  // namespace

Estimate population_meta_loss(const Vector& w, const TaskSpec& task, const MetaConfig& cfg, const LossModel& loss,
                              Stream& rng) {
  const Vector points[] = {w};
  return population_draws(points, task, cfg, loss, rng, false)[0].estimate();
}

PairedEstimate population_meta_loss_paired(const Vector& first, const Vector& second, const TaskSpec& task,
                                           const MetaConfig& cfg, const LossModel& loss, Stream& rng) {
  const Vector points[] = {first, second};
  const auto stats = population_draws(points, task, cfg, loss, rng, true);
  return {stats[0].estimate(), stats[1].estimate(), stats[2].estimate()};
}

double average_objectives(std::span<const double> values, std::span<const double> weights) {
  require(!values.empty(), ErrorCode::InvalidSize, "nothing to average");
  check_weights(weights, values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += weights.empty() ? values[i] / static_cast<double>(values.size()) : weights[i] * values[i];
  }
  return total;
}

Vector average_objectives(std::span<const Vector> values, std::span<const double> weights) {
  require(!values.empty(), ErrorCode::InvalidSize, "nothing to average");
  check_weights(weights, values.size());
  Vector total = Vector::Zero(values.front().size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i].size() == total.size(), ErrorCode::DimensionMismatch, "averaged vectors differ in size");
    total += (weights.empty() ? 1.0 / static_cast<double>(values.size()) : weights[i]) * values[i];
  }
  return total;
}

QuadraticForm empirical_meta_quadratic(const TaskDataset& dataset, const MetaConfig& cfg, const LossModel& loss) {
  require(loss.constant_hessian(), ErrorCode::Unsupported, "quadratic representation needs a constant Hessian");
  const SubsetPlan plan = plan_subsets(dataset.n(), cfg);
  const int d = static_cast<int>(dataset.inner.front().x.size());
  const Vector zero = Vector::Zero(d);
  const Batch outer = batch_of(dataset.outer);
  const Matrix h_out = loss.mean_hessian(zero, outer);
  const Vector g_out = loss.mean_gradient(zero, outer);
  const double v_out = loss.mean_value(zero, outer);
  const Matrix eye = Matrix::Identity(d, d);

  std::vector<QuadraticForm> partial(plan.chunks(), QuadraticForm{Matrix::Zero(d, d), Vector::Zero(d), 0.0});
  parallel_for(partial.size(), [&](std::size_t c) {
    QuadraticForm& acc = partial[c];
    visit_chunk(plan, c, [&](const std::vector<std::size_t>& idx) {
      // Adapted point is A w + shift with A = I - alpha H_D.
      const Batch inner = select(dataset.inner, idx);
      const Matrix a = eye - cfg.alpha * loss.mean_hessian(zero, inner);
      const Vector shift = -cfg.alpha * loss.mean_gradient(zero, inner);
      const Vector h_shift = h_out * shift;
      acc.hessian.noalias() += a.transpose() * h_out * a;
      acc.linear.noalias() += a.transpose() * (h_shift + g_out);
      acc.constant += 0.5 * shift.dot(h_shift) + g_out.dot(shift) + v_out;
    });
  });
  QuadraticForm total{Matrix::Zero(d, d), Vector::Zero(d), 0.0};
  for (const auto& p : partial) {
    total.hessian += p.hessian;
    total.linear += p.linear;
    total.constant += p.constant;
  }
  const double scale = 1.0 / static_cast<double>(plan.count);
  const Matrix sym = 0.5 * scale * (total.hessian + total.hessian.transpose());
  total.hessian = sym;
  total.linear *= scale;
  total.constant *= scale;
  return total;
}

double gradient_mapping_norm(const Vector& w, const Vector& grad, double eta, const ConstraintSet& set) {
  return (w - project(w - eta * grad, set)).norm() / eta;
}

namespace {

// Exact minimizer of 0.5 v'Qv + g'v over ||v|| <= radius from Q = U diag(lambda) U'.
Vector ball_step(const Vector& lambda, const Matrix& basis, const Vector& g, double radius) {
  const Vector gt = basis.transpose() * g;
  const double bottom = lambda.minCoeff();
  auto step = [&](double shift) {
    Vector c(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double denom = lambda[i] + shift;
      c[i] = denom > 0.0 ? -gt[i] / denom : 0.0;
    }
    return c;
  };
  if (bottom > 0.0) {
    const Vector c = step(0.0);
    if (c.norm() <= radius) return basis * c;
  }
  const double lo = std::max(0.0, -bottom);
  Vector c = step(lo);
  if (c.norm() <= radius) {
    // Hard case: move along the lowest eigenvector to reach the boundary.
    Eigen::Index low = 0;
    lambda.minCoeff(&low);
    c[low] += std::sqrt(std::max(0.0, radius * radius - c.squaredNorm()));
    return basis * c;
  }
  double a = lo;
  double b = lo + g.norm() / radius;
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    (step(mid).norm() > radius ? a : b) = mid;
  }
  return basis * step(b);
}

}  // namespace

SolveResult minimize_quadratic(const QuadraticForm& form, const ConstraintSet& set, double tol,
                               std::size_t max_iterations) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(form.hessian);
  const Vector& lambda = eig.eigenvalues();
  const double top = lambda.maxCoeff();
  require(top > 0.0, ErrorCode::InvalidArgument, "quadratic objective has no positive curvature");
  const double eta = 1.0 / top;

  SolveResult out;
  Vector w;
  if (set.bounded()) {
    w = project(set.center + ball_step(lambda, eig.eigenvectors(), form.gradient(set.center), set.radius), set);
  } else {
    require(lambda.minCoeff() > 0.0, ErrorCode::InvalidArgument, "unconstrained quadratic has no minimizer");
    w = eig.eigenvectors() * (eig.eigenvectors().transpose() * -form.linear).cwiseQuotient(lambda);
  }
  // Accelerated projected gradient polishes the closed-form point to the tolerance.
  Vector y = w;
  double momentum = 1.0;
  out.residual = gradient_mapping_norm(w, form.gradient(w), eta, set);
  while (out.residual > tol && out.iterations < max_iterations) {
    const Vector next = project(y - eta * form.gradient(y), set);
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    if (form.value(next) > form.value(w)) {
      // Adaptive restart keeps the accelerated scheme monotone.
      y = w;
      momentum = 1.0;
    } else {
      y = next + ((momentum - 1.0) / next_momentum) * (next - w);
      w = next;
      momentum = next_momentum;
    }
    ++out.iterations;
    out.residual = gradient_mapping_norm(w, form.gradient(w), eta, set);
  }
  if (out.residual > tol) {
    throw NonConvergenceError("projected solve did not reach the gradient-mapping tolerance", out.residual);
  }
  out.w = std::move(w);
  out.value = form.value(out.w);
  return out;
}

SolveResult minimize_projected(const std::function<double(const Vector&)>& value,
                               const std::function<Vector(const Vector&)>& gradient, const Vector& start,
                               double step, const ConstraintSet& set, double tol, std::size_t max_iterations) {
  require(step > 0.0, ErrorCode::InvalidArgument, "step must be positive");
  SolveResult out;
  Vector w = project(start, set);
  Vector g = gradient(w);
  out.residual = gradient_mapping_norm(w, g, step, set);
  while (out.residual > tol && out.iterations < max_iterations) {
    w = project(w - step * g, set);
    g = gradient(w);
    ++out.iterations;
    out.residual = gradient_mapping_norm(w, g, step, set);
  }
  if (out.residual > tol) {
    throw NonConvergenceError("projected gradient descent did not reach the gradient-mapping tolerance",
                              out.residual);
  }
  out.w = std::move(w);
  out.value = value(out.w);
  return out;
}

double empirical_objective(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                           const LossModel& loss) {
  std::vector<double> values;
  values.reserve(collection.m());
  for (const auto& ds : collection.datasets) values.push_back(empirical_meta_loss(w, ds, cfg, loss).value);
  return average_objectives(values);
}

Vector empirical_objective_gradient(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                                    const LossModel& loss) {
  std::vector<Vector> grads;
  grads.reserve(collection.m());
  for (const auto& ds : collection.datasets) grads.push_back(empirical_meta_gradient(w, ds, cfg, loss).gradient);
  return average_objectives(grads);
}

namespace {

QuadraticForm collection_quadratic(const TaskCollection& collection, const MetaConfig& cfg, const LossModel& loss) {
  QuadraticForm total;
  const double scale = 1.0 / static_cast<double>(collection.m());
  for (const auto& ds : collection.datasets) {
    const QuadraticForm f = empirical_meta_quadratic(ds, cfg, loss);
    if (total.hessian.size() == 0) {
      total = {scale * f.hessian, scale * f.linear, scale * f.constant};
    } else {
      total.hessian += scale * f.hessian;
      total.linear += scale * f.linear;
      total.constant += scale * f.constant;
    }
  }
  return total;
}

}  // namespace

SolveResult minimize_empirical(const TaskCollection& collection, const MetaConfig& cfg, const LossModel& loss,
                               const ConstraintSet& set, double tol) {
  collection.validate();
  if (loss.constant_hessian()) {
    SolveResult out = minimize_quadratic(collection_quadratic(collection, cfg, loss), set, tol);
    out.value = empirical_objective(out.w, collection, cfg, loss);
    return out;
  }
  // Generic losses: plain projected descent with a step from the smoothness
  // of the adapted loss on the sample envelope.
  double x_max = 0.0;
  for (const auto& ds : collection.datasets) {
    for (const auto* split : {&ds.inner, &ds.outer}) {
      for (const auto& s : *split) x_max = std::max(x_max, s.x.norm());
    }
  }
  const double smooth = 4.0 * loss.curvature(x_max).smooth;
  return minimize_projected([&](const Vector& w) { return empirical_objective(w, collection, cfg, loss); },
                            [&](const Vector& w) { return empirical_objective_gradient(w, collection, cfg, loss); },
                            Vector::Zero(collection.dim()), 1.0 / smooth, set, tol, 1'000'000);
}

ErrorReport error_decomposition(const Vector& w, const TaskCollection& collection, const MetaConfig& cfg,
                                const LossModel& loss, const DecompositionOptions& options) {
  collection.validate();
  require(collection.has_specs(), ErrorCode::Unsupported, "population evaluation needs the task laws");
  require(options.set.contains(w, 1e-9), ErrorCode::InvalidArgument, "evaluation point lies outside W");
  require(options.population_multiplier >= 1, ErrorCode::InvalidArgument, "population multiplier must be positive");

  const double fhat = empirical_objective(w, collection, cfg, loss);
  const SolveResult empirical = minimize_empirical(collection, cfg, loss, options.set, options.solver_tol);

  const TaskCollection fresh =
      collection_from_specs(collection.specs, options.population_multiplier * collection.n(),
                            combine_keys(options.seed, static_cast<std::uint64_t>(Purpose::Population)));
  const SolveResult population = minimize_empirical(fresh, cfg, loss, options.set, options.solver_tol);

  const double m = static_cast<double>(collection.m());
  double f_w = 0.0, f_pop = 0.0, diff = 0.0, var_w = 0.0, var_diff = 0.0;
  for (std::size_t i = 0; i < collection.m(); ++i) {
    Stream rng(options.seed, i, Purpose::Evaluation);
    const PairedEstimate e = population_meta_loss_paired(w, population.w, collection.specs[i], cfg, loss, rng);
    f_w += e.first.mean / m;
    f_pop += e.second.mean / m;
    diff += e.difference.mean / m;
    var_w += e.first.se * e.first.se / (m * m);
    var_diff += e.difference.se * e.difference.se / (m * m);
  }

  ErrorReport report;
  report.test_error = diff;
  report.generalization_error = f_w - fhat;
  report.training_error = fhat - empirical.value;
  report.empirical_min_value = empirical.value;
  report.population_min_value = f_pop;
  report.se_test = std::sqrt(var_diff);
  report.se_gen = std::sqrt(var_w);
  return report;
}

}  // namespace metastab
