#pragma once

#include <vector>

#include "core/trainer.hpp"

namespace metastab {

struct FedConfig : TrainerConfig {
  std::size_t tau = 1;
  /// Record one row per (round, user, local step).
  bool verbose_trace = false;
};

struct LocalStepRecord {
  std::size_t round = 0;
  std::size_t user = 0;
  std::size_t local_step = 0;
  double beta = 0.0;
  double norm = 0.0;
};

struct FedOutput {
  TrainerOutput output;
  std::vector<LocalStepRecord> local_trace;
};

/// Distributed MAML: tau projected local steps per selected user, then a
/// plain server average. With tau = 1 and an unbounded W this reproduces
/// maml_train bit for bit.
FedOutput fed_train(const TaskCollection& collection, const FedConfig& cfg, const LossModel& loss);

struct PersonalizationReport {
  std::vector<Estimate> per_user;
  Estimate average;
};

/// Post-adaptation population loss of the averaged meta-model on each user's task.
PersonalizationReport fed_personalization_eval(const TrainerOutput& output, const TaskCollection& collection,
                                               const MetaConfig& cfg, const LossModel& loss, std::uint64_t seed);

}  // namespace metastab
