#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/federated.hpp"
#include "core/meta_objective.hpp"
#include "core/sweep.hpp"
#include "core/task_model.hpp"
#include "core/trainer.hpp"

namespace metastab {

/// Shortest round-trip decimal ("%.17g").
std::string format_double(double value);

/// Header `d n m`, then `task_index split x_1 ... x_d y` per sample with
/// split in {in, out}. Task laws are not stored.
std::string collection_to_text(const TaskCollection& collection);
TaskCollection collection_from_text(const std::string& text);
void save_collection(const TaskCollection& collection, const std::string& path);
TaskCollection load_collection(const std::string& path);

/// SHA-1 of "blob <size>\0<content>", as git computes object ids.
std::string git_blob_hash(const std::string& content);
std::string collection_hash(const TaskCollection& collection);

/// Iterates as text; equal hashes mean bit-identical iterates.
std::string output_to_text(const TrainerOutput& output);
std::string output_hash(const TrainerOutput& output);

/// `t,beta_t,fhat,u_t,v_t`, empty where not recorded.
std::string trace_csv(const TrainerOutput& output);
/// `round,user,local_step,beta_t,norm`.
std::string local_trace_csv(const std::vector<LocalStepRecord>& records);
/// `t,beta_t,d,u_t,v_t`.
std::string coupled_trace_csv(const CoupledOutput& output);

std::string error_report_header();
std::string error_report_row(const ErrorReport& report);

/// `m,n,gamma_hat,se,mean_divergence,gamma_theory` plus a summary line.
std::string stability_csv(const StabilityReport& report, const std::string& input_hash);
/// `seen_index,tv,se` plus summary lines.
std::string shift_csv(const ShiftReport& report, const std::string& input_hash);

/// `figure,m,n,error_mean,error_se`.
std::string sweep_csv(const SweepResult& result);
/// `figure,direction,slope,se`.
std::string trend_csv(const SweepResult& result);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace metastab
