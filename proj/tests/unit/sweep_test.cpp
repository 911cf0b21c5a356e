#include <gtest/gtest.h>

#include <cmath>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/sweep.hpp"

using namespace metastab;

namespace {

SweepConfig tiny() {
  SweepConfig cfg;
  cfg.ms = {1, 3};
  cfg.ns = {10, 20};
  cfg.reps = 3;
  cfg.family.dim = 3;
  cfg.t_max = 300;
  cfg.mc_population = 1000;
  cfg.population_multiplier = 5;
  cfg.constant_probes = 1000;
  cfg.seed = 2;
  return cfg;
}

}  // namespace

TEST(Figures, NamesRoundTrip) {
  for (auto f : {FigureKind::Recurring, FigureKind::NewSimilar, FigureKind::NewDissimilar}) {
    EXPECT_EQ(parse_figure(figure_name(f)), f);
  }
  EXPECT_THROW(parse_figure("fig9"), Error);
}

TEST(Sweep, GridShapeDeterminismAndTrends) {
  const SweepConfig cfg = tiny();
  const SweepResult a = run_sweep(cfg);
  const SweepResult b = run_sweep(cfg);
  ASSERT_EQ(a.cells.size(), 3u * 2u * 2u);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].mean, b.cells[i].mean);
    EXPECT_EQ(a.cells[i].per_rep.size(), 3u);
    EXPECT_GE(a.cells[i].se, 0.0);
  }
  EXPECT_NEAR(a.beta_cap, 1.0 / (4.0 * a.constants.smooth), 1e-15);
  ASSERT_EQ(a.trends.size(), 6u);

  // The n-trend of one figure, recomputed from the per-replicate cell values.
  RunningStats slopes;
  for (std::size_t r = 0; r < 3; ++r) {
    std::vector<double> x, y;
    for (std::size_t n : cfg.ns) {
      double mean = 0.0;
      for (std::size_t m : cfg.ms) mean += a.cell(FigureKind::NewSimilar, m, n).per_rep[r] / 2.0;
      x.push_back(std::log(static_cast<double>(n)));
      y.push_back(mean);
    }
    slopes.add(fit_slope(x, y));
  }
  EXPECT_NEAR(a.trend(FigureKind::NewSimilar, "n").slope, slopes.mean(), 1e-12);
}

TEST(Sweep, RejectsBadGrids) {
  SweepConfig cfg = tiny();
  cfg.reps = 2;
  EXPECT_THROW(run_sweep(cfg), Error);
  cfg = tiny();
  cfg.ns = {3};
  EXPECT_THROW(run_sweep(cfg), Error);
  cfg = tiny();
  cfg.ms.clear();
  EXPECT_THROW(run_sweep(cfg), Error);
}
