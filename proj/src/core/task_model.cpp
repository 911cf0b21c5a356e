#include "core/task_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace metastab {

void TaskSpec::validate() const {
  require(mean.size() >= 1, ErrorCode::InvalidDimension, "task dimension must be at least 1");
  require(coeff.size() == mean.size(), ErrorCode::DimensionMismatch, "task mean and coefficient sizes differ");
  require(std::abs(coeff.norm() - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "task coefficient must be a unit vector");
  require(feature_cov_scale >= 0.0 && noise_var >= 0.0, ErrorCode::InvalidArgument,
          "task covariance scales must be nonnegative");
}

bool TaskSpec::operator==(const TaskSpec& other) const {
  return mean.size() == other.mean.size() && mean == other.mean && coeff == other.coeff &&
         feature_cov_scale == other.feature_cov_scale && noise_var == other.noise_var;
}

int TaskCollection::dim() const {
  if (!datasets.empty() && !datasets.front().inner.empty()) return static_cast<int>(datasets.front().inner.front().x.size());
  if (!specs.empty()) return specs.front().dim();
  return 0;
}

void TaskCollection::validate() const {
  require(!datasets.empty(), ErrorCode::InvalidSize, "task collection is empty");
  require(specs.empty() || specs.size() == datasets.size(), ErrorCode::InvalidArgument,
          "task collection has mismatched spec and dataset counts");
  const std::size_t size = n();
  const int d = dim();
  require(size >= 1, ErrorCode::InvalidSize, "datasets must hold at least one sample per split");
  for (const auto& ds : datasets) {
    require(ds.inner.size() == size && ds.outer.size() == size, ErrorCode::InvalidSize,
            "all datasets must share the same n for both splits");
    for (const auto* split : {&ds.inner, &ds.outer}) {
      for (const auto& s : *split) {
        require(s.x.size() == d, ErrorCode::DimensionMismatch, "all samples must share the same dimension");
      }
    }
  }
  for (const auto& spec : specs) {
    require(spec.dim() == d, ErrorCode::DimensionMismatch, "task law dimension differs from its samples");
  }
}

TaskSpec task_from_draws(const Vector& mean, const Vector& u, TaskMode mode, double feature_cov_scale,
                         double noise_var) {
  require(mean.size() >= 1, ErrorCode::InvalidDimension, "task dimension must be at least 1");
  require(u.size() == mean.size(), ErrorCode::DimensionMismatch, "direction draw has the wrong dimension");
  const Vector ones = Vector::Ones(u.size());
  Vector direction = mode == TaskMode::Similar ? Vector(u + ones) : Vector(u - ones);
  const double norm = direction.norm();
  require(norm > 0.0, ErrorCode::InvalidArgument, "degenerate direction draw");
  TaskSpec spec;
  spec.mean = mean;
  spec.coeff = direction / norm;
  spec.feature_cov_scale = feature_cov_scale;
  spec.noise_var = noise_var;
  spec.validate();
  return spec;
}

TaskSpec generate_task(std::uint64_t seed, int dim, TaskMode mode, double feature_cov_scale, double noise_var) {
  require(dim >= 1, ErrorCode::InvalidDimension, "task dimension must be at least 1");
  Stream rng(seed, 0, Purpose::TaskLaw);
  Vector mean(dim);
  for (int j = 0; j < dim; ++j) mean[j] = rng.uniform();
  for (;;) {
    Vector u(dim);
    for (int j = 0; j < dim; ++j) u[j] = rng.uniform();
    if (mode == TaskMode::Dissimilar && (u - Vector::Ones(dim)).norm() == 0.0) continue;
    return task_from_draws(mean, u, mode, feature_cov_scale, noise_var);
  }
}

Sample sample_point(const TaskSpec& task, Stream& rng) {
  const double scale = std::sqrt(task.feature_cov_scale);
  const double noise = std::sqrt(task.noise_var);
  Sample s;
  s.x.resize(task.dim());
  for (int j = 0; j < task.dim(); ++j) s.x[j] = task.mean[j] + scale * rng.normal();
  s.y = task.coeff.dot(s.x) + noise * rng.normal();
  return s;
}

TaskDataset build_dataset(const TaskSpec& task, std::size_t n, Stream& rng) {
  require(n >= 1, ErrorCode::InvalidSize, "dataset size n must be at least 1");
  Stream inner_rng = rng.derive(static_cast<std::uint64_t>(Purpose::Inner));
  Stream outer_rng = rng.derive(static_cast<std::uint64_t>(Purpose::Outer));
  TaskDataset ds;
  ds.inner.reserve(n);
  ds.outer.reserve(n);
  for (std::size_t j = 0; j < n; ++j) ds.inner.push_back(sample_point(task, inner_rng));
  for (std::size_t j = 0; j < n; ++j) ds.outer.push_back(sample_point(task, outer_rng));
  return ds;
}

TaskSpec family_task(const FamilyRecipe& recipe, std::size_t index, TaskMode mode) {
  return generate_task(combine_keys(recipe.seed, index), recipe.dim, mode, recipe.feature_cov_scale, recipe.noise_var);
}

TaskCollection collection_from_specs(std::vector<TaskSpec> specs, std::size_t n, std::uint64_t seed) {
  require(!specs.empty(), ErrorCode::InvalidSize, "at least one task is required");
  TaskCollection out;
  out.datasets.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Stream rng(seed, i, Purpose::Dataset);
    out.datasets.push_back(build_dataset(specs[i], n, rng));
  }
  out.specs = std::move(specs);
  out.validate();
  return out;
}

TaskCollection generate_collection(const FamilyRecipe& recipe, std::size_t m, std::size_t n) {
  require(m >= 1, ErrorCode::InvalidSize, "number of tasks m must be at least 1");
  std::vector<TaskSpec> specs;
  specs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) specs.push_back(family_task(recipe, i));
  return collection_from_specs(std::move(specs), n, recipe.seed);
}

namespace {

std::vector<std::size_t> choose_distinct(std::size_t n, std::size_t k, Stream& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t j = 0; j < n; ++j) pool[j] = j;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(pool[j], pool[pick]);
  }
  pool.resize(k);
  return pool;
}

bool appears_in(const Sample& s, const TaskDataset& ds) {
  return std::find(ds.inner.begin(), ds.inner.end(), s) != ds.inner.end() ||
         std::find(ds.outer.begin(), ds.outer.end(), s) != ds.outer.end();
}

}  // namespace

PerturbedCollection perturb_dataset(const TaskCollection& collection, std::size_t task_index, std::size_t k,
                                    Stream& rng) {
  require(task_index < collection.m(), ErrorCode::InvalidPerturbation, "perturbation task index out of range");
  require(k >= 1 && k <= collection.n(), ErrorCode::InvalidPerturbation,
          "perturbation size k must satisfy 1 <= k <= n");
  require(collection.has_specs(), ErrorCode::Unsupported, "perturbation needs the task laws");
  const TaskSpec& law = collection.specs[task_index];

  PerturbedCollection out{collection, {}};
  out.target.task_index = task_index;
  out.target.inner_positions = choose_distinct(collection.n(), k, rng);
  out.target.outer_position = static_cast<std::size_t>(rng.below(collection.n()));

  TaskDataset& ds = out.collection.datasets[task_index];
  const TaskDataset& original = collection.datasets[task_index];
  auto fresh = [&]() {
    Sample s = sample_point(law, rng);
    // Continuous laws make a collision a probability-zero event.
    require(!appears_in(s, original), ErrorCode::InvalidArgument, "fresh draw collided with an existing sample");
    return s;
  };
  for (std::size_t pos : out.target.inner_positions) ds.inner[pos] = fresh();
  ds.outer[out.target.outer_position] = fresh();
  return out;
}

bool has_joint_density(const TaskSpec& task) { return task.feature_cov_scale > 0.0 && task.noise_var > 0.0; }

double joint_log_density(const TaskSpec& task, const Vector& x, double y) {
  require(has_joint_density(task), ErrorCode::Unsupported, "task law has no joint density (degenerate Gaussian)");
  require(x.size() == task.dim(), ErrorCode::DimensionMismatch, "sample dimension differs from task dimension");
  constexpr double log_two_pi = 1.8378770664093454835606594728112;
  const double d = static_cast<double>(task.dim());
  const double feature = -0.5 * (x - task.mean).squaredNorm() / task.feature_cov_scale -
                         0.5 * d * (log_two_pi + std::log(task.feature_cov_scale));
  const double residual = y - task.coeff.dot(x);
  const double label = -0.5 * residual * residual / task.noise_var - 0.5 * (log_two_pi + std::log(task.noise_var));
  return feature + label;
}

CoupledSamples maximal_coupling_sample(const TaskSpec& p, const TaskSpec& q, Stream& rng) {
  require(p.dim() == q.dim(), ErrorCode::DimensionMismatch, "coupled laws must share the dimension");
  if (p == q) {
    Sample s = sample_point(p, rng);
    return {s, s, true};
  }
  require(has_joint_density(p) && has_joint_density(q), ErrorCode::Unsupported,
          "maximal coupling needs two non-degenerate Gaussian laws");
  Sample x = sample_point(p, rng);
  const double log_px = joint_log_density(p, x.x, x.y);
  const double log_qx = joint_log_density(q, x.x, x.y);
  if (std::log(rng.uniform_open()) + log_px <= log_qx) return {x, x, true};
  for (;;) {
    Sample y = sample_point(q, rng);
    const double log_qy = joint_log_density(q, y.x, y.y);
    const double log_py = joint_log_density(p, y.x, y.y);
    if (std::log(rng.uniform_open()) + log_qy > log_py) return {std::move(x), std::move(y), false};
  }
}

}  // namespace metastab
