#include <gtest/gtest.h>

#include "core/errors.hpp"
#include "core/federated.hpp"
#include "support.hpp"

using namespace metastab;
using metastab::testing::small_collection;

namespace {

const RegularizedQuadratic kLoss(0.01);

FedConfig fed_config(const TaskCollection& c, std::size_t tau) {
  FedConfig cfg;
  cfg.m = c.m();
  cfg.n = c.n();
  cfg.k = 4;
  cfg.b = 2;
  cfg.r = c.m();
  cfg.t_max = 300;
  cfg.alpha = 0.01;
  cfg.beta_cap = 0.05;
  cfg.seed = 9;
  cfg.tau = tau;
  cfg.constraint = ConstraintSet::unbounded(c.dim());
  return cfg;
}

}  // namespace

TEST(FedTrain, SingleLocalStepReproducesTheTrainer) {
  const TaskCollection c = small_collection(5, 12);
  for (std::size_t r : {1u, 3u, 5u}) {
    FedConfig cfg = fed_config(c, 1);
    cfg.r = r;
    cfg.record_loss = true;
    const FedOutput fed = fed_train(c, cfg, kLoss);
    const TrainerOutput plain = maml_train(c, cfg, kLoss);
    EXPECT_TRUE(fed.output.last_iterate == plain.last_iterate);
    EXPECT_TRUE(fed.output.averaged_iterate == plain.averaged_iterate);
    ASSERT_EQ(fed.output.loss_trace.size(), plain.loss_trace.size());
    for (std::size_t i = 0; i < plain.loss_trace.size(); ++i) {
      EXPECT_EQ(fed.output.loss_trace[i].fhat, plain.loss_trace[i].fhat);
    }
  }
}

TEST(FedTrain, SingleUserReplay) {
  const TaskCollection c = small_collection(1, 10);
  FedConfig cfg = fed_config(c, 3);
  cfg.t_max = 20;
  cfg.constraint = ConstraintSet::ball(3, 0.4);
  const FedOutput fed = fed_train(c, cfg, kLoss);

  Vector w = Vector::Zero(3);
  for (std::size_t t = 0; t < cfg.t_max; ++t) {
    const RoundStreams streams(cfg.seed, t);
    const double beta = stepsize(t, cfg.beta_cap, 0.02);
    for (std::size_t s = 0; s < 3; ++s) {
      Stream rng = streams.batches(0, s);
      const BatchIndices idx = draw_batch_indices(10, cfg.k, cfg.b, rng);
      w = project(w - beta * meta_gradient_for_indices(w, c.datasets[0], idx, cfg.alpha, kLoss), cfg.constraint);
    }
  }
  EXPECT_TRUE(fed.output.last_iterate == w);
}

TEST(FedTrain, LocalAndServerIteratesStayFeasible) {
  const TaskCollection c = small_collection(6, 10);
  FedConfig cfg = fed_config(c, 4);
  cfg.r = 3;
  cfg.beta_cap = 1.0;
  cfg.verbose_trace = true;
  cfg.constraint = ConstraintSet::ball(3, 0.25);
  cfg.observer = [](std::size_t, const Vector& w) { ASSERT_LE(w.norm(), 0.25 + 1e-12); };
  const FedOutput fed = fed_train(c, cfg, kLoss);
  EXPECT_EQ(fed.local_trace.size(), cfg.t_max * cfg.r);
  for (const auto& row : fed.local_trace) {
    EXPECT_LE(row.norm, 0.25 + 1e-12);
    EXPECT_EQ(row.local_step, 4u);
  }
}

TEST(FedTrain, ParallelRoundsAreDeterministic) {
  const TaskCollection c = small_collection(8, 10);
  FedConfig cfg = fed_config(c, 10);
  cfg.t_max = 30;
  const FedOutput a = fed_train(c, cfg, kLoss), b = fed_train(c, cfg, kLoss);
  EXPECT_TRUE(a.output.last_iterate == b.output.last_iterate);
}

TEST(FedTrain, RejectsZeroLocalSteps) {
  const TaskCollection c = small_collection(2, 5);
  EXPECT_THROW(fed_train(c, fed_config(c, 0), kLoss), Error);
}

TEST(Personalization, AveragesPerUserPopulationLoss) {
  const TaskCollection c = small_collection(3, 10);
  const FedOutput fed = fed_train(c, fed_config(c, 2), kLoss);
  MetaConfig mc;
  mc.k = 4;
  mc.alpha = 0.01;
  mc.mc_population = 3000;
  const PersonalizationReport r = fed_personalization_eval(fed.output, c, mc, kLoss, 21);
  ASSERT_EQ(r.per_user.size(), 3u);
  double mean = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    Stream rng(21, i, Purpose::Evaluation);
    const Estimate e = population_meta_loss(fed.output.averaged_iterate, c.specs[i], mc, kLoss, rng);
    EXPECT_EQ(r.per_user[i].mean, e.mean);
    mean += e.mean / 3;
  }
  EXPECT_NEAR(r.average.mean, mean, 1e-14);
  EXPECT_GT(r.average.se, 0.0);

  TaskCollection bare = c;
  bare.specs.clear();
  EXPECT_THROW(fed_personalization_eval(fed.output, bare, mc, kLoss, 21), Error);
}
