#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/rng.hpp"
#include "core/types.hpp"

namespace metastab {

enum class TaskMode { Similar, Dissimilar };

/// Generative law of one task: x ~ N(mean, feature_cov_scale * I),
/// y = coeff . x + eps with eps ~ N(0, noise_var).
struct TaskSpec {
  Vector mean;
  Vector coeff;
  double feature_cov_scale = 0.2;
  double noise_var = 0.1;

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;
  bool operator==(const TaskSpec& other) const;
};

struct Sample {
  Vector x;
  double y = 0.0;

  bool operator==(const Sample& other) const { return y == other.y && x == other.x; }
};

struct TaskDataset {
  std::vector<Sample> inner;
  std::vector<Sample> outer;

  std::size_t n() const { return inner.size(); }
  bool operator==(const TaskDataset& other) const = default;
};

/// m tasks with their split samples. `specs` is empty when the collection was
/// loaded from disk, since the sample file does not carry the generative laws.
struct TaskCollection {
  std::vector<TaskSpec> specs;
  std::vector<TaskDataset> datasets;

  std::size_t m() const { return datasets.size(); }
  std::size_t n() const { return datasets.empty() ? 0 : datasets.front().n(); }
  int dim() const;
  bool has_specs() const { return !specs.empty(); }
  void validate() const;
  bool operator==(const TaskCollection& other) const = default;
};

/// Positions replaced by perturb_dataset, needed for overlap bookkeeping.
struct PerturbationTarget {
  std::size_t task_index = 0;
  std::vector<std::size_t> inner_positions;
  std::size_t outer_position = 0;
};

struct PerturbedCollection {
  TaskCollection collection;
  PerturbationTarget target;
};

/// Parameters shared by every task of a synthetic family.
struct FamilyRecipe {
  int dim = 10;
  double feature_cov_scale = 0.2;
  double noise_var = 0.1;
  std::uint64_t seed = 0;
};

/// Builds a task from explicit draws: mean ~ U[0,1]^d and u ~ U[0,1]^d.
TaskSpec task_from_draws(const Vector& mean, const Vector& u, TaskMode mode, double feature_cov_scale,
                         double noise_var);
TaskSpec generate_task(std::uint64_t seed, int dim, TaskMode mode, double feature_cov_scale, double noise_var);

Sample sample_point(const TaskSpec& task, Stream& rng);

/// Inner and outer halves come from two child streams of `rng`, so a dataset
/// of size n is a prefix of the dataset of size n' > n built from the same stream.
TaskDataset build_dataset(const TaskSpec& task, std::size_t n, Stream& rng);

/// Task i of a family uses key (seed, i); the unseen tasks of the figure
/// sweeps use indices far beyond any realistic m.
TaskSpec family_task(const FamilyRecipe& recipe, std::size_t index, TaskMode mode = TaskMode::Similar);
TaskCollection generate_collection(const FamilyRecipe& recipe, std::size_t m, std::size_t n);
/// Collection whose datasets are drawn from already-fixed laws.
TaskCollection collection_from_specs(std::vector<TaskSpec> specs, std::size_t n, std::uint64_t seed);

PerturbedCollection perturb_dataset(const TaskCollection& collection, std::size_t task_index, std::size_t k,
                                    Stream& rng);

/// log density of z = (x, y) under the joint Gaussian law of `task`.
double joint_log_density(const TaskSpec& task, const Vector& x, double y);
/// Whether the joint law has a density on R^{d+1}.
bool has_joint_density(const TaskSpec& task);

struct CoupledSamples {
  Sample first;
  Sample second;
  bool coupled = false;
};

/// Draws from a maximal coupling of p and q: first ~ p, second ~ q and
/// P(first != second) = TV(p, q).
CoupledSamples maximal_coupling_sample(const TaskSpec& p, const TaskSpec& q, Stream& rng);

inline constexpr std::uint64_t kUnseenSimilarIndex = 1'000'000'001ULL;
inline constexpr std::uint64_t kUnseenDissimilarIndex = 1'000'000'002ULL;

}  // namespace metastab
