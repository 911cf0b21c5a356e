#pragma once

#include <string>
#include <vector>

#include "core/losses.hpp"
#include "core/meta_objective.hpp"
#include "core/task_model.hpp"

namespace metastab {

enum class FigureKind { Recurring, NewSimilar, NewDissimilar };

const char* figure_name(FigureKind kind);
FigureKind parse_figure(const std::string& name);

struct SweepConfig {
  std::vector<std::size_t> ms{1, 5, 10, 20};
  std::vector<std::size_t> ns{25, 50, 100, 200};
  std::vector<FigureKind> figures{FigureKind::Recurring, FigureKind::NewSimilar, FigureKind::NewDissimilar};
  std::size_t reps = 5;
  FamilyRecipe family;
  double reg = 0.01;
  double alpha = 0.1;
  std::size_t k = 5;
  std::size_t b = 10;
  /// Tasks per round; 0 selects every task.
  std::size_t r = 0;
  std::size_t t_max = 20'000;
  /// 0 picks 1/(4L) from the estimated constants.
  double beta_cap = 0.0;
  double radius = 10.0;
  std::size_t mc_population = 20'000;
  /// Reference minimizers use this many fresh samples per split times the largest n.
  std::size_t population_multiplier = 50;
  std::size_t constant_probes = 10'000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SweepCell {
  FigureKind figure = FigureKind::Recurring;
  std::size_t m = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> per_rep;
};

struct TrendEstimate {
  FigureKind figure = FigureKind::Recurring;
  /// "m" or "n".
  std::string direction;
  double slope = 0.0;
  double se = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<TrendEstimate> trends;
  double beta_cap = 0.0;
  LossConstants constants;

  const SweepCell& cell(FigureKind figure, std::size_t m, std::size_t n) const;
  const TrendEstimate& trend(FigureKind figure, const std::string& direction) const;
};

/// Test error (post-adaptation population excess loss) over the (m, n)
/// grid for each requested figure. Replicates resample the task laws; within
/// a replicate, task i, its samples and all evaluation draws are shared by
/// every cell so that grid differences are not masked by noise.
SweepResult run_sweep(const SweepConfig& cfg);

/// Slopes of the test error against log m (pooled over n) and log n (pooled
/// over m), per replicate, summarized as mean and standard error.
std::vector<TrendEstimate> sweep_trends(const std::vector<SweepCell>& cells, const SweepConfig& cfg);

}  // namespace metastab
