#include "metastab/metastab.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <string>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/federated.hpp"
#include "core/serialize.hpp"
#include "core/sweep.hpp"

using namespace metastab;

struct ms_collection {
  TaskCollection value;
};

struct ms_output {
  TrainerOutput output;
  std::vector<LocalStepRecord> local_trace;
  bool federated = false;
};

struct ms_report {
  std::map<std::string, std::string> sections;
  std::map<std::string, double> values;
  LossConstants constants;
};

namespace {

thread_local std::string last_error;
thread_local long last_round = -1;
thread_local long last_user = -1;
thread_local long last_step = -1;

ms_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return MS_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidDimension: return MS_ERR_INVALID_DIMENSION;
    case ErrorCode::InvalidSize: return MS_ERR_INVALID_SIZE;
    case ErrorCode::InvalidPerturbation: return MS_ERR_INVALID_PERTURBATION;
    case ErrorCode::DimensionMismatch: return MS_ERR_DIMENSION_MISMATCH;
    case ErrorCode::EmptyBatch: return MS_ERR_EMPTY_BATCH;
    case ErrorCode::InvalidWeights: return MS_ERR_INVALID_WEIGHTS;
    case ErrorCode::Divergence: return MS_ERR_DIVERGENCE;
    case ErrorCode::NonConvergence: return MS_ERR_NON_CONVERGENCE;
    case ErrorCode::Premise: return MS_ERR_PREMISE;
    case ErrorCode::NotRecorded: return MS_ERR_NOT_RECORDED;
    case ErrorCode::Unsupported: return MS_ERR_UNSUPPORTED;
    case ErrorCode::Io: return MS_ERR_IO;
    case ErrorCode::Parse: return MS_ERR_PARSE;
  }
  return MS_ERR_INTERNAL;
}

template <class Fn>
ms_status guarded(Fn&& fn) {
  last_error.clear();
  last_round = last_user = last_step = -1;
  try {
    fn();
    return MS_OK;
  } catch (const DivergenceError& e) {
    last_error = e.what();
    last_round = e.round();
    last_user = e.user();
    last_step = e.local_step();
    return MS_ERR_DIVERGENCE;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MS_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_hash(const std::string& hash, char* buffer, std::size_t size) {
  need(buffer, "buffer");
  require(size > hash.size(), ErrorCode::InvalidSize, "hash buffer needs at least 41 bytes");
  std::memcpy(buffer, hash.c_str(), hash.size() + 1);
}

FamilyRecipe recipe_of(const ms_family_params& f) {
  FamilyRecipe r;
  r.dim = f.dim;
  r.feature_cov_scale = f.feature_cov_scale;
  r.noise_var = f.noise_var;
  r.seed = f.seed;
  require(r.dim >= 1, ErrorCode::InvalidDimension, "dimension must be at least 1");
  return r;
}

ConstraintSet set_of(double radius, int dim) {
  require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive (INFINITY for no projection)");
  return std::isinf(radius) ? ConstraintSet::unbounded(dim) : ConstraintSet::ball(dim, radius);
}

ms_constants to_c(const LossConstants& c) { return {c.mu, c.smooth, c.grad_bound, c.hess_lip, c.value_bound}; }

LossConstants from_c(const ms_constants& c) { return {c.mu, c.smooth, c.grad_bound, c.hess_lip, c.value_bound}; }

LossConstants constants_for(const TaskCollection& collection, const LossModel& loss, double radius, int probes,
                            std::uint64_t seed) {
  const double r = std::isinf(radius) ? 10.0 : radius;
  const ConstraintSet set = ConstraintSet::ball(collection.dim(), r);
  Stream rng(seed, 0, Purpose::Constants);
  if (collection.has_specs()) return compute_constants(loss, set, collection.specs, probes, rng);
  return compute_constants_from_samples(loss, set, collection, probes, rng);
}

TrainerConfig trainer_of(const TaskCollection& collection, const ms_train_params& p) {
  TrainerConfig cfg;
  cfg.m = collection.m();
  cfg.n = collection.n();
  cfg.k = p.k;
  cfg.b = p.b;
  cfg.r = p.r == 0 ? collection.m() : p.r;
  cfg.t_max = p.t_max;
  cfg.alpha = p.alpha;
  cfg.beta_cap = p.beta_cap;
  cfg.seed = p.seed;
  cfg.constraint = set_of(p.radius, collection.dim());
  cfg.record_loss = p.record_loss != 0;
  cfg.trace_subsets = p.trace_subsets;
  return cfg;
}

MetaConfig meta_of(const ms_train_params& p, std::size_t mc_population) {
  MetaConfig mc;
  mc.alpha = p.alpha;
  mc.k = p.k;
  mc.mc_population = mc_population == 0 ? mc.mc_population : mc_population;
  return mc;
}

}  // namespace

extern "C" {

MS_API const char* ms_version(void) { return "0.1.0"; }

MS_API const char* ms_status_name(ms_status status) {
  switch (status) {
    case MS_OK: return "ok";
    case MS_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case MS_ERR_INVALID_DIMENSION: return "invalid-dimension";
    case MS_ERR_INVALID_SIZE: return "invalid-size";
    case MS_ERR_INVALID_PERTURBATION: return "invalid-perturbation";
    case MS_ERR_DIMENSION_MISMATCH: return "dimension-mismatch";
    case MS_ERR_EMPTY_BATCH: return "empty-batch";
    case MS_ERR_INVALID_WEIGHTS: return "invalid-weights";
    case MS_ERR_DIVERGENCE: return "divergence";
    case MS_ERR_NON_CONVERGENCE: return "non-convergence";
    case MS_ERR_PREMISE: return "premise-violation";
    case MS_ERR_NOT_RECORDED: return "not-recorded";
    case MS_ERR_UNSUPPORTED: return "unsupported";
    case MS_ERR_IO: return "io";
    case MS_ERR_PARSE: return "parse";
    case MS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

MS_API const char* ms_last_error(void) { return last_error.c_str(); }

MS_API void ms_last_divergence(long* round, long* user, long* local_step) {
  if (round) *round = last_round;
  if (user) *user = last_user;
  if (local_step) *local_step = last_step;
}

MS_API void ms_string_free(char* s) { std::free(s); }

MS_API ms_status ms_content_hash(const char* data, size_t len, char* buffer, size_t size) {
  return guarded([&] {
    require(data != nullptr || len == 0, ErrorCode::InvalidArgument, "data must not be NULL");
    copy_hash(git_blob_hash(std::string(data == nullptr ? "" : data, len)), buffer, size);
  });
}

MS_API void ms_family_params_default(ms_family_params* params) {
  if (params == nullptr) return;
  params->dim = 10;
  params->feature_cov_scale = 0.2;
  params->noise_var = 0.1;
  params->seed = 0;
}

MS_API ms_status ms_collection_generate(const ms_family_params* family, size_t m, size_t n, ms_collection** out) {
  return guarded([&] {
    need(family, "family");
    need(out, "out");
    auto c = std::make_unique<ms_collection>();
    c->value = generate_collection(recipe_of(*family), m, n);
    *out = c.release();
  });
}

MS_API ms_status ms_collection_load(const char* path, ms_collection** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<ms_collection>();
    c->value = load_collection(path);
    *out = c.release();
  });
}

MS_API ms_status ms_collection_save(const ms_collection* collection, const char* path) {
  return guarded([&] {
    need(collection, "collection");
    need(path, "path");
    save_collection(collection->value, path);
  });
}

MS_API ms_status ms_collection_hash(const ms_collection* collection, char* buffer, size_t size) {
  return guarded([&] {
    need(collection, "collection");
    copy_hash(collection_hash(collection->value), buffer, size);
  });
}

MS_API ms_status ms_collection_shape(const ms_collection* collection, size_t* dim, size_t* n, size_t* m) {
  return guarded([&] {
    need(collection, "collection");
    if (dim) *dim = static_cast<size_t>(collection->value.dim());
    if (n) *n = collection->value.n();
    if (m) *m = collection->value.m();
  });
}

MS_API int ms_collection_has_laws(const ms_collection* collection) {
  return collection != nullptr && collection->value.has_specs() ? 1 : 0;
}

MS_API void ms_collection_free(ms_collection* collection) { delete collection; }

MS_API ms_status ms_constants_compute(const ms_collection* collection, double reg, double radius, int probes,
                                      uint64_t seed, ms_constants* out) {
  return guarded([&] {
    need(collection, "collection");
    need(out, "out");
    const RegularizedQuadratic loss(reg);
    *out = to_c(constants_for(collection->value, loss, radius, probes, seed));
  });
}

MS_API double ms_admissible_alpha(const ms_constants* constants) {
  return constants == nullptr ? 0.0 : admissible_alpha(from_c(*constants));
}

MS_API double ms_meta_smoothness(const ms_constants* constants, double alpha) {
  return constants == nullptr ? 0.0 : meta_smoothness(from_c(*constants), alpha);
}

MS_API double ms_stepsize(size_t t, double beta_cap, double mu) { return stepsize(t, beta_cap, mu); }

MS_API void ms_train_params_default(ms_train_params* params) {
  if (params == nullptr) return;
  params->k = 5;
  params->b = 10;
  params->r = 0;
  params->t_max = 20000;
  params->alpha = 0.1;
  params->beta_cap = 0.0;
  params->reg = 0.01;
  params->radius = 10.0;
  params->seed = 0;
  params->record_loss = 0;
  params->trace_subsets = 2000;
  params->tau = 1;
  params->verbose_trace = 0;
}

namespace {

double resolve_beta(const TaskCollection& collection, const ms_train_params& p, const LossModel& loss) {
  if (p.beta_cap > 0.0) return p.beta_cap;
  const LossConstants c = constants_for(collection, loss, p.radius, 10'000, p.seed);
  return 1.0 / meta_smoothness(c, p.alpha);
}

}  // namespace

MS_API ms_status ms_train(const ms_collection* collection, const ms_train_params* params, ms_output** out) {
  return guarded([&] {
    need(collection, "collection");
    need(params, "params");
    need(out, "out");
    const RegularizedQuadratic loss(params->reg);
    TrainerConfig cfg = trainer_of(collection->value, *params);
    cfg.beta_cap = resolve_beta(collection->value, *params, loss);
    auto o = std::make_unique<ms_output>();
    o->output = maml_train(collection->value, cfg, loss);
    *out = o.release();
  });
}

MS_API ms_status ms_fed_train(const ms_collection* collection, const ms_train_params* params, ms_output** out) {
  return guarded([&] {
    need(collection, "collection");
    need(params, "params");
    need(out, "out");
    const RegularizedQuadratic loss(params->reg);
    FedConfig cfg;
    static_cast<TrainerConfig&>(cfg) = trainer_of(collection->value, *params);
    cfg.beta_cap = resolve_beta(collection->value, *params, loss);
    cfg.tau = params->tau;
    cfg.verbose_trace = params->verbose_trace != 0;
    FedOutput fed = fed_train(collection->value, cfg, loss);
    auto o = std::make_unique<ms_output>();
    o->output = std::move(fed.output);
    o->local_trace = std::move(fed.local_trace);
    o->federated = true;
    *out = o.release();
  });
}

MS_API size_t ms_output_dim(const ms_output* output) {
  return output == nullptr ? 0 : static_cast<size_t>(output->output.last_iterate.size());
}

MS_API ms_status ms_output_iterates(const ms_output* output, double* last, double* averaged, size_t dim) {
  return guarded([&] {
    need(output, "output");
    require(dim == static_cast<size_t>(output->output.last_iterate.size()), ErrorCode::DimensionMismatch,
            "iterate buffer size differs from the model dimension");
    for (size_t j = 0; j < dim; ++j) {
      if (last) last[j] = output->output.last_iterate[static_cast<Eigen::Index>(j)];
      if (averaged) averaged[j] = output->output.averaged_iterate[static_cast<Eigen::Index>(j)];
    }
  });
}

MS_API ms_status ms_output_hash(const ms_output* output, char* buffer, size_t size) {
  return guarded([&] {
    need(output, "output");
    copy_hash(output_hash(output->output), buffer, size);
  });
}

MS_API ms_status ms_output_text(const ms_output* output, char** text) {
  return guarded([&] {
    need(output, "output");
    need(text, "text");
    *text = duplicate(output_to_text(output->output));
  });
}

MS_API ms_status ms_output_trace_csv(const ms_output* output, char** csv) {
  return guarded([&] {
    need(output, "output");
    need(csv, "csv");
    *csv = duplicate(trace_csv(output->output));
  });
}

MS_API ms_status ms_output_local_trace_csv(const ms_output* output, char** csv) {
  return guarded([&] {
    need(output, "output");
    need(csv, "csv");
    require(output->federated, ErrorCode::NotRecorded, "local traces exist for federated runs only");
    *csv = duplicate(local_trace_csv(output->local_trace));
  });
}

MS_API ms_status ms_output_error_report(const ms_output* output, const ms_collection* collection,
                                        const ms_train_params* params, size_t mc_population, char** csv_row) {
  return guarded([&] {
    need(output, "output");
    need(collection, "collection");
    need(params, "params");
    need(csv_row, "csv_row");
    const RegularizedQuadratic loss(params->reg);
    DecompositionOptions opts;
    opts.set = set_of(params->radius, collection->value.dim());
    opts.seed = params->seed;
    const ErrorReport r =
        error_decomposition(output->output.averaged_iterate, collection->value, meta_of(*params, mc_population), loss, opts);
    *csv_row = duplicate(error_report_row(r));
  });
}

MS_API ms_status ms_output_personalization(const ms_output* output, const ms_collection* collection,
                                           const ms_train_params* params, size_t mc_population, char** csv) {
  return guarded([&] {
    need(output, "output");
    need(collection, "collection");
    need(params, "params");
    need(csv, "csv");
    const RegularizedQuadratic loss(params->reg);
    const PersonalizationReport r =
        fed_personalization_eval(output->output, collection->value, meta_of(*params, mc_population), loss, params->seed);
    std::string text = "user,loss,se\n";
    for (std::size_t i = 0; i < r.per_user.size(); ++i) {
      text += std::to_string(i) + "," + format_double(r.per_user[i].mean) + "," + format_double(r.per_user[i].se) + "\n";
    }
    text += "mean," + format_double(r.average.mean) + "," + format_double(r.average.se) + "\n";
    *csv = duplicate(text);
  });
}

MS_API void ms_output_free(ms_output* output) { delete output; }

MS_API void ms_stability_params_default(ms_stability_params* params) {
  if (params == nullptr) return;
  ms_family_params_default(&params->family);
  ms_train_params_default(&params->train);
  params->train.t_max = 2000;
  params->train.b = 1;
  params->grid_m = nullptr;
  params->grid_n = nullptr;
  params->grid_len = 0;
  params->trials = 10;
  params->probes = 256;
  params->envelope_widen = 2.0;
  params->leading_const = 1.0;
  params->perturb_k = -1;
  params->constant_probes = 10'000;
  params->input_hash = nullptr;
}

MS_API void ms_shift_params_default(ms_shift_params* params) {
  if (params == nullptr) return;
  ms_family_params_default(&params->family);
  params->m = 5;
  params->n = 50;
  params->k = 5;
  params->alpha = 0.1;
  params->reg = 0.01;
  params->radius = 10.0;
  params->unseen = MS_UNSEEN_SIMILAR;
  params->tv_samples = 200'000;
  params->weights = nullptr;
  params->leading_const = 1.0;
  params->constant_probes = 10'000;
  params->seed = 0;
}

MS_API void ms_figures_params_default(ms_figures_params* params) {
  if (params == nullptr) return;
  ms_family_params_default(&params->family);
  params->ms = nullptr;
  params->ms_len = 0;
  params->ns = nullptr;
  params->ns_len = 0;
  params->figures = 7;
  params->reps = 5;
  params->reg = 0.01;
  params->alpha = 0.1;
  params->k = 5;
  params->b = 10;
  params->r = 0;
  params->t_max = 20'000;
  params->beta_cap = 0.0;
  params->radius = 10.0;
  params->mc_population = 20'000;
  params->population_multiplier = 50;
  params->seed = 0;
}

MS_API ms_status ms_stability_run(const ms_stability_params* params, ms_report** out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    require(params->grid_len >= 1 && params->grid_m != nullptr && params->grid_n != nullptr,
            ErrorCode::InvalidArgument, "stability needs at least one (m, n) grid point");
    const FamilyRecipe family = recipe_of(params->family);
    const ms_train_params& tp = params->train;
    const RegularizedQuadratic loss(tp.reg);
    std::vector<std::pair<std::size_t, std::size_t>> grid;
    std::size_t m_max = 0;
    for (size_t j = 0; j < params->grid_len; ++j) {
      grid.emplace_back(params->grid_m[j], params->grid_n[j]);
      m_max = std::max(m_max, params->grid_m[j]);
    }
    std::vector<TaskSpec> laws;
    for (std::size_t i = 0; i < m_max; ++i) laws.push_back(family_task(family, i));
    const double radius = std::isinf(tp.radius) ? 10.0 : tp.radius;
    Stream rng(tp.seed, 0, Purpose::Constants);
    const LossConstants c =
        compute_constants(loss, ConstraintSet::ball(family.dim, radius), laws, params->constant_probes, rng);

    TrainerConfig cfg;
    cfg.k = tp.k;
    cfg.b = tp.b;
    cfg.r = tp.r;
    cfg.t_max = tp.t_max;
    cfg.alpha = tp.alpha;
    cfg.beta_cap = tp.beta_cap > 0.0 ? tp.beta_cap : 1.0 / meta_smoothness(c, tp.alpha);
    cfg.seed = tp.seed;
    cfg.constraint = set_of(tp.radius, family.dim);
    StabilityOptions opts;
    opts.probes = params->probes;
    opts.envelope_widen = params->envelope_widen;
    opts.leading_const = params->leading_const;
    if (params->perturb_k >= 0) opts.perturb_k = static_cast<std::size_t>(params->perturb_k);
    check_stability_premise(cfg, c);
    const StabilityReport report = stability_grid(family, cfg, grid, params->trials, loss, c, opts);

    auto r = std::make_unique<ms_report>();
    r->constants = c;
    r->sections["main"] = stability_csv(report, params->input_hash == nullptr ? "" : params->input_hash);
    r->values["gamma_hat"] = report.gamma_hat;
    r->values["gamma_se"] = report.gamma_se;
    r->values["gamma_theory"] = report.gamma_theory;
    r->values["fitted_slope"] = report.fitted_slope;
    r->values["beta_cap"] = cfg.beta_cap;
    *out = r.release();
  });
}

MS_API ms_status ms_shift_run(const ms_shift_params* params, ms_report** out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    const FamilyRecipe family = recipe_of(params->family);
    require(params->m >= 1, ErrorCode::InvalidSize, "shift needs at least one seen task");
    std::vector<TaskSpec> seen;
    for (std::size_t i = 0; i < params->m; ++i) seen.push_back(family_task(family, i));
    TaskSpec unseen;
    switch (params->unseen) {
      case MS_UNSEEN_SIMILAR: unseen = family_task(family, kUnseenSimilarIndex, TaskMode::Similar); break;
      case MS_UNSEEN_DISSIMILAR: unseen = family_task(family, kUnseenDissimilarIndex, TaskMode::Dissimilar); break;
      case MS_UNSEEN_CLONE:
        unseen = seen.front();
        std::fill(seen.begin(), seen.end(), unseen);
        break;
      default: fail(ErrorCode::InvalidArgument, "unknown unseen-task mode");
    }
    const RegularizedQuadratic loss(params->reg);
    std::vector<TaskSpec> laws = seen;
    laws.push_back(unseen);
    const double radius = std::isinf(params->radius) ? 10.0 : params->radius;
    Stream rng(params->seed, 0, Purpose::Constants);
    const LossConstants c =
        compute_constants(loss, ConstraintSet::ball(family.dim, radius), laws, params->constant_probes, rng);
    ShiftOptions opts;
    opts.tv_samples = params->tv_samples;
    opts.seed = params->seed;
    opts.m = params->m;
    opts.n = params->n;
    opts.k = params->k;
    opts.leading_const = params->leading_const;
    if (params->weights != nullptr) opts.weights.assign(params->weights, params->weights + params->m);
    const ShiftReport report = shift_bound(unseen, seen, c, params->alpha, opts);
    const TaskCollection hashed = collection_from_specs(seen, params->n, family.seed);

    auto r = std::make_unique<ms_report>();
    r->constants = c;
    r->sections["main"] = shift_csv(report, collection_hash(hashed));
    r->values["tv_to_mixture"] = report.tv_to_mixture.mean;
    r->values["d_bound"] = report.d_bound;
    r->values["largek_gamma"] = report.largek_gamma;
    if (report.weighted_d_bound) r->values["weighted_d_bound"] = *report.weighted_d_bound;
    *out = r.release();
  });
}

MS_API ms_status ms_figures_run(const ms_figures_params* params, ms_report** out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    SweepConfig cfg;
    cfg.family = recipe_of(params->family);
    if (params->ms_len > 0) {
      need(params->ms, "ms");
      cfg.ms.assign(params->ms, params->ms + params->ms_len);
    }
    if (params->ns_len > 0) {
      need(params->ns, "ns");
      cfg.ns.assign(params->ns, params->ns + params->ns_len);
    }
    cfg.figures.clear();
    if (params->figures & 1u) cfg.figures.push_back(FigureKind::Recurring);
    if (params->figures & 2u) cfg.figures.push_back(FigureKind::NewSimilar);
    if (params->figures & 4u) cfg.figures.push_back(FigureKind::NewDissimilar);
    cfg.reps = params->reps;
    cfg.reg = params->reg;
    cfg.alpha = params->alpha;
    cfg.k = params->k;
    cfg.b = params->b;
    cfg.r = params->r;
    cfg.t_max = params->t_max;
    cfg.beta_cap = params->beta_cap;
    cfg.radius = params->radius;
    cfg.mc_population = params->mc_population;
    cfg.population_multiplier = params->population_multiplier;
    cfg.seed = params->seed;
    const SweepResult result = run_sweep(cfg);

    auto r = std::make_unique<ms_report>();
    r->constants = result.constants;
    r->sections["main"] = sweep_csv(result);
    r->sections["trends"] = trend_csv(result);
    r->values["beta_cap"] = result.beta_cap;
    for (const auto& t : result.trends) {
      const std::string key = std::string(figure_name(t.figure)) + "_slope_" + t.direction;
      r->values[key] = t.slope;
      r->values[key + "_se"] = t.se;
    }
    *out = r.release();
  });
}

MS_API ms_status ms_report_csv(const ms_report* report, const char* section, char** csv) {
  return guarded([&] {
    need(report, "report");
    need(section, "section");
    need(csv, "csv");
    const auto it = report->sections.find(section);
    require(it != report->sections.end(), ErrorCode::NotRecorded, std::string("report has no section '") + section + "'");
    *csv = duplicate(it->second);
  });
}

MS_API ms_status ms_report_value(const ms_report* report, const char* key, double* value) {
  return guarded([&] {
    need(report, "report");
    need(key, "key");
    need(value, "value");
    const auto it = report->values.find(key);
    require(it != report->values.end(), ErrorCode::NotRecorded, std::string("report has no value '") + key + "'");
    *value = it->second;
  });
}

MS_API ms_status ms_report_constants(const ms_report* report, ms_constants* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = to_c(report->constants);
  });
}

MS_API void ms_report_free(ms_report* report) { delete report; }

}  // extern "C"
