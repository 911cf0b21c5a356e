#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "metastab/metastab.h"
#include "plot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using metastab::cli::Config;
using metastab::cli::ConfigError;
using metastab::cli::Field;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitPremise = 4;

class LibraryError : public std::runtime_error {
 public:
  LibraryError(ms_status status, const std::string& what) : std::runtime_error(what), status(status) {}
  ms_status status;
};

void check(ms_status status) {
  if (status != MS_OK) throw LibraryError(status, ms_last_error());
}

struct CollectionHandle {
  ms_collection* p = nullptr;
  ~CollectionHandle() { ms_collection_free(p); }
};
struct OutputHandle {
  ms_output* p = nullptr;
  ~OutputHandle() { ms_output_free(p); }
};
struct ReportHandle {
  ms_report* p = nullptr;
  ~ReportHandle() { ms_report_free(p); }
};

std::string take(char* s) {
  std::string out(s);
  ms_string_free(s);
  return out;
}

std::string report_csv(const ms_report* report, const char* section) {
  char* csv = nullptr;
  check(ms_report_csv(report, section, &csv));
  return take(csv);
}

std::string content_hash(const std::string& text) {
  char buf[41];
  check(ms_content_hash(text.data(), text.size(), buf, sizeof buf));
  return buf;
}

json constants_json(const ms_constants& c) {
  return {{"mu", c.mu}, {"smooth", c.smooth}, {"grad_bound", c.grad_bound}, {"hess_lip", c.hess_lip},
          {"value_bound", c.value_bound}};
}

// Collects artifacts and writes manifest.json last.
class Run {
 public:
  Run(std::string command, const Config& cfg)
      : command_(std::move(command)), dir_(cfg.text("out")), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    manifest_["command"] = command_;
    manifest_["version"] = ms_version();
    json echo = json::object();
    for (const auto& [k, v] : cfg.echo()) echo[k] = v;
    manifest_["config"] = echo;
    manifest_["config_hash"] = content_hash(cfg.echo_text());
  }

  std::string write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
    outputs_.push_back(path.string());
    return path.string();
  }

  void record(const std::string& path) { outputs_.push_back(path); }

  json& manifest() { return manifest_; }
  std::string config_hash() const { return manifest_["config_hash"]; }

  void finish() {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_["wall_clock_seconds"] = seconds;
    manifest_["outputs"] = outputs_;
    const fs::path path = dir_ / "manifest.json";
    std::ofstream f(path);
    f << manifest_.dump(2) << "\n";
    if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
    std::cout << "wrote " << outputs_.size() << " artifacts and manifest to " << dir_.string() << "\n";
  }

 private:
  std::string command_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  json manifest_;
  std::vector<std::string> outputs_;
};

// ---- field tables ----

std::vector<Field> common_fields() {
  return {{"config", "flat `key = value` file; flags override it", "", false},
          {"out", "output directory", ".", false},
          {"seed", "master seed", "0", false}};
}

std::vector<Field> family_fields() {
  return {{"d", "feature dimension", "10", false},
          {"cov_scale", "feature covariance scale", "0.2", false},
          {"noise_var", "label noise variance", "0.1", false}};
}

std::vector<Field> train_fields(bool federated) {
  std::vector<Field> f = {
      {"tasks", "task-collection file; generated from the family fields when absent", "", false},
      {"m", "number of tasks (when generating)", "", false},
      {"n", "samples per split and task (when generating)", "", false},
      {"k", "inner batch size K", "5", false},
      {"b", "outer batch size", "10", false},
      {"r", "tasks per round (0 selects all)", "0", false},
      {"t_max", "number of rounds T", "20000", false},
      {"alpha", "adaptation stepsize", "0.1", false},
      {"beta_cap", "stepsize cap (0 derives it from the constants)", "0", false},
      {"reg", "ridge coefficient", "0.01", false},
      {"radius", "feasible-ball radius (inf disables projection)", "10", false},
      {"record_loss", "record the empirical objective at geometric checkpoints", "false", true},
      {"trace_subsets", "subsets per traced objective value", "2000", false},
      {"error_report", "write the error decomposition of the averaged iterate", "false", true},
      {"mc_population", "Monte Carlo samples for population losses", "20000", false},
      {"constant_probes", "probes for the loss constants", "10000", false},
  };
  if (federated) {
    f.push_back({"tau", "local steps per round", "1", false});
    f.push_back({"verbose_trace", "record every local step", "false", true});
    f.push_back({"personalize", "write per-user post-adaptation losses", "false", true});
  }
  return f;
}

std::vector<Field> stability_fields() {
  return {{"grid", "comma-separated MxN points", "10x10,20x20,40x40,80x80", false},
          {"trials", "trials per grid point", "10", false},
          {"k", "inner batch size K", "5", false},
          {"b", "outer batch size", "1", false},
          {"r", "tasks per round (0 selects all)", "0", false},
          {"t_max", "number of rounds T", "2000", false},
          {"alpha", "adaptation stepsize", "0.1", false},
          {"beta_cap", "stepsize cap (0 derives it from the constants)", "0", false},
          {"reg", "ridge coefficient", "0.01", false},
          {"radius", "feasible-ball radius", "10", false},
          {"probes", "evaluation probes per trial", "256", false},
          {"envelope_widen", "covariance inflation of the probe envelope", "2", false},
          {"leading_const", "leading constant of the theoretical rate", "1", false},
          {"perturb_k", "replaced inner points per trial (negative means K)", "-1", false},
          {"constant_probes", "probes for the loss constants", "10000", false}};
}

std::vector<Field> shift_fields() {
  return {{"m", "number of seen tasks", "5", false},
          {"n", "samples per split and task", "50", false},
          {"k", "inner batch size K", "5", false},
          {"alpha", "adaptation stepsize", "0.1", false},
          {"reg", "ridge coefficient", "0.01", false},
          {"radius", "feasible-ball radius", "10", false},
          {"unseen", "unseen task: similar, dissimilar or clone", "similar", false},
          {"tv_samples", "Monte Carlo samples per TV estimate", "200000", false},
          {"weights", "optional comma-separated mixture weights over seen tasks", "", false},
          {"leading_const", "leading constant of the large-K rate", "1", false},
          {"constant_probes", "probes for the loss constants", "10000", false}};
}

std::vector<Field> figure_fields() {
  return {{"which", "figures: all or a list of recurring, new_similar, new_dissimilar", "all", false},
          {"ms", "task counts", "1,5,10,20", false},
          {"ns", "samples per task", "25,50,100,200", false},
          {"reps", "replicates per cell", "5", false},
          {"full", "expand the grid and replicate count", "false", true},
          {"k", "inner batch size K", "5", false},
          {"b", "outer batch size", "10", false},
          {"r", "tasks per round (0 selects all)", "0", false},
          {"t_max", "number of rounds T", "20000", false},
          {"alpha", "adaptation stepsize", "0.1", false},
          {"beta_cap", "stepsize cap (0 derives it from the constants)", "0", false},
          {"reg", "ridge coefficient", "0.01", false},
          {"radius", "feasible-ball radius", "10", false},
          {"mc_population", "Monte Carlo samples per test-error estimate", "20000", false},
          {"population_multiplier", "reference sample size as a multiple of max n", "50", false}};
}

std::vector<Field> join(std::initializer_list<std::vector<Field>> parts) {
  std::vector<Field> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// ---- shared helpers ----

ms_family_params family_of(const Config& cfg) {
  ms_family_params f;
  ms_family_params_default(&f);
  const long d = cfg.integer("d");
  if (d < 1) throw ConfigError("field 'd': dimension must be at least 1");
  f.dim = static_cast<int>(d);
  f.feature_cov_scale = cfg.real("cov_scale");
  f.noise_var = cfg.real("noise_var");
  f.seed = cfg.u64("seed");
  return f;
}

ms_train_params train_params_of(const Config& cfg, bool federated) {
  ms_train_params p;
  ms_train_params_default(&p);
  p.k = cfg.size("k");
  p.b = cfg.size("b");
  p.r = cfg.size("r");
  p.t_max = cfg.size("t_max");
  p.alpha = cfg.real("alpha");
  p.beta_cap = cfg.real("beta_cap");
  p.reg = cfg.real("reg");
  p.radius = cfg.real("radius");
  p.seed = cfg.u64("seed");
  if (cfg.has("record_loss")) p.record_loss = cfg.boolean("record_loss") ? 1 : 0;
  if (cfg.has("trace_subsets")) p.trace_subsets = cfg.size("trace_subsets");
  if (federated) {
    p.tau = cfg.size("tau");
    p.verbose_trace = cfg.boolean("verbose_trace") ? 1 : 0;
  }
  return p;
}

void warn_alpha(const ms_constants& c, double alpha) {
  const double admissible = ms_admissible_alpha(&c);
  if (alpha > admissible) {
    std::cerr << "warning: alpha = " << alpha << " exceeds the admissible value " << admissible
              << " for these loss constants\n";
  }
}

std::string collection_hash(const ms_collection* c) {
  char buf[41];
  check(ms_collection_hash(c, buf, sizeof buf));
  return buf;
}

// ---- commands ----

int cmd_gen_tasks(const Config& cfg) {
  const ms_family_params family = family_of(cfg);
  const std::size_t m = cfg.size("m");
  const std::size_t n = cfg.size("n");
  Run run("gen-tasks", cfg);
  CollectionHandle c;
  check(ms_collection_generate(&family, m, n, &c.p));
  const std::string path = (fs::path(cfg.text("out")) / cfg.text("file")).string();
  check(ms_collection_save(c.p, path.c_str()));
  run.record(path);
  run.manifest()["collection_hash"] = collection_hash(c.p);
  run.finish();
  return 0;
}

int cmd_train(const Config& cfg, bool federated) {
  CollectionHandle c;
  if (auto tasks = cfg.maybe("tasks")) {
    check(ms_collection_load(tasks->c_str(), &c.p));
    std::size_t dim = 0, n = 0, m = 0;
    check(ms_collection_shape(c.p, &dim, &n, &m));
    if (cfg.maybe("m") && cfg.size("m") != m) throw ConfigError("field 'm' disagrees with the task file");
    if (cfg.maybe("n") && cfg.size("n") != n) throw ConfigError("field 'n' disagrees with the task file");
  } else {
    const ms_family_params family = family_of(cfg);
    check(ms_collection_generate(&family, cfg.size("m"), cfg.size("n"), &c.p));
  }
  const bool personalize = federated && cfg.boolean("personalize");
  if ((cfg.boolean("error_report") || personalize) && !ms_collection_has_laws(c.p)) {
    throw ConfigError("population evaluation needs the task laws, which task files do not store; "
                      "generate the tasks from the family fields instead of 'tasks'");
  }
  ms_train_params p = train_params_of(cfg, federated);
  Run run(federated ? "fed-train" : "train", cfg);

  ms_constants constants;
  check(ms_constants_compute(c.p, p.reg, p.radius, static_cast<int>(cfg.size("constant_probes")), p.seed, &constants));
  warn_alpha(constants, p.alpha);
  if (p.beta_cap <= 0.0) p.beta_cap = 1.0 / ms_meta_smoothness(&constants, p.alpha);
  run.manifest()["constants"] = constants_json(constants);
  run.manifest()["resolved_beta_cap"] = p.beta_cap;
  run.manifest()["collection_hash"] = collection_hash(c.p);

  OutputHandle out;
  check(federated ? ms_fed_train(c.p, &p, &out.p) : ms_train(c.p, &p, &out.p));
  char* text = nullptr;
  check(ms_output_text(out.p, &text));
  run.write("iterates.txt", take(text));
  char hash[41];
  check(ms_output_hash(out.p, hash, sizeof hash));
  run.manifest()["output_hash"] = hash;
  char* trace = nullptr;
  check(ms_output_trace_csv(out.p, &trace));
  run.write("trace.csv", take(trace));
  if (federated && p.verbose_trace) {
    char* local = nullptr;
    check(ms_output_local_trace_csv(out.p, &local));
    run.write("local_trace.csv", take(local));
  }
  const std::size_t mc = cfg.size("mc_population");
  if (cfg.boolean("error_report")) {
    char* row = nullptr;
    check(ms_output_error_report(out.p, c.p, &p, mc, &row));
    run.write("errors.csv", "test,gen,train,emp_min,pop_min,se_test,se_gen\n" + take(row) + "\n");
  }
  if (personalize) {
    char* csv = nullptr;
    check(ms_output_personalization(out.p, c.p, &p, mc, &csv));
    run.write("personalization.csv", take(csv));
  }
  std::cout << "output hash " << hash << "\n";
  run.finish();
  return 0;
}

int cmd_stability(const Config& cfg) {
  ms_stability_params p;
  ms_stability_params_default(&p);
  p.family = family_of(cfg);
  std::vector<std::size_t> grid_m, grid_n;
  {
    std::istringstream in(cfg.text("grid"));
    for (std::string item; std::getline(in, item, ',');) {
      std::size_t mv = 0, nv = 0;
      char x = 0, rest = 0;
      std::istringstream is(item);
      if (!(is >> mv >> x >> nv) || x != 'x' || (is >> rest) || mv == 0 || nv == 0) {
        throw ConfigError("field 'grid': expected entries like 10x20, got '" + item + "'");
      }
      grid_m.push_back(mv);
      grid_n.push_back(nv);
    }
  }
  if (grid_m.empty()) throw ConfigError("field 'grid': no grid points");
  p.grid_m = grid_m.data();
  p.grid_n = grid_n.data();
  p.grid_len = grid_m.size();
  p.train.k = cfg.size("k");
  p.train.b = cfg.size("b");
  p.train.r = cfg.size("r");
  p.train.t_max = cfg.size("t_max");
  p.train.alpha = cfg.real("alpha");
  p.train.beta_cap = cfg.real("beta_cap");
  p.train.reg = cfg.real("reg");
  p.train.radius = cfg.real("radius");
  p.train.seed = cfg.u64("seed");
  p.trials = cfg.size("trials");
  p.probes = cfg.size("probes");
  p.envelope_widen = cfg.real("envelope_widen");
  p.leading_const = cfg.real("leading_const");
  p.perturb_k = cfg.integer("perturb_k");
  p.constant_probes = static_cast<int>(cfg.size("constant_probes"));

  Run run("stability", cfg);
  const std::string input_hash = run.config_hash();
  p.input_hash = input_hash.c_str();
  ReportHandle r;
  check(ms_stability_run(&p, &r.p));
  ms_constants constants;
  check(ms_report_constants(r.p, &constants));
  warn_alpha(constants, p.train.alpha);
  run.manifest()["constants"] = constants_json(constants);
  run.manifest()["input_hash"] = input_hash;
  for (const char* key : {"gamma_hat", "gamma_theory", "fitted_slope", "beta_cap"}) {
    double v = 0.0;
    check(ms_report_value(r.p, key, &v));
    run.manifest()["summary"][key] = v;
    std::cout << key << " = " << v << "\n";
  }
  run.write("stability.csv", report_csv(r.p, "main"));
  run.finish();
  return 0;
}

int cmd_shift(const Config& cfg) {
  ms_shift_params p;
  ms_shift_params_default(&p);
  p.family = family_of(cfg);
  p.m = cfg.size("m");
  p.n = cfg.size("n");
  p.k = cfg.size("k");
  p.alpha = cfg.real("alpha");
  p.reg = cfg.real("reg");
  p.radius = cfg.real("radius");
  p.seed = cfg.u64("seed");
  const std::string unseen = cfg.text("unseen");
  if (unseen == "similar") {
    p.unseen = MS_UNSEEN_SIMILAR;
  } else if (unseen == "dissimilar") {
    p.unseen = MS_UNSEEN_DISSIMILAR;
  } else if (unseen == "clone") {
    p.unseen = MS_UNSEEN_CLONE;
  } else {
    throw ConfigError("field 'unseen': expected similar, dissimilar or clone, got '" + unseen + "'");
  }
  p.tv_samples = cfg.size("tv_samples");
  p.leading_const = cfg.real("leading_const");
  p.constant_probes = static_cast<int>(cfg.size("constant_probes"));
  std::vector<double> weights;
  if (cfg.has("weights")) {
    weights = cfg.reals("weights");
    if (weights.size() != p.m) throw ConfigError("field 'weights': expected " + std::to_string(p.m) + " entries");
    p.weights = weights.data();
  }

  Run run("shift", cfg);
  ReportHandle r;
  check(ms_shift_run(&p, &r.p));
  ms_constants constants;
  check(ms_report_constants(r.p, &constants));
  warn_alpha(constants, p.alpha);
  run.manifest()["constants"] = constants_json(constants);
  const std::string csv = report_csv(r.p, "main");
  const auto at = csv.find("input_hash=");
  if (at != std::string::npos) run.manifest()["input_hash"] = csv.substr(at + 11, 40);
  for (const char* key : {"tv_to_mixture", "d_bound", "largek_gamma"}) {
    double v = 0.0;
    check(ms_report_value(r.p, key, &v));
    run.manifest()["summary"][key] = v;
    std::cout << key << " = " << v << "\n";
  }
  run.write("shift.csv", csv);
  run.finish();
  return 0;
}

std::vector<std::string> write_charts(Run& run, const std::string& csv) {
  std::vector<std::string> paths;
  for (const auto& [name, svg] : metastab::cli::sweep_charts(csv)) paths.push_back(run.write(name, svg));
  return paths;
}

int cmd_reproduce_figures(const Config& cfg) {
  ms_figures_params p;
  ms_figures_params_default(&p);
  p.family = family_of(cfg);
  const bool full = cfg.boolean("full");
  std::vector<std::size_t> ms = cfg.sizes("ms");
  std::vector<std::size_t> ns = cfg.sizes("ns");
  p.reps = cfg.size("reps");
  if (full) {
    ms = {1, 2, 5, 10, 20, 50};
    ns = {25, 50, 100, 200, 400};
    p.reps = std::max<std::size_t>(p.reps, 10);
  }
  p.ms = ms.data();
  p.ms_len = ms.size();
  p.ns = ns.data();
  p.ns_len = ns.size();
  const std::string which = cfg.text("which");
  p.figures = 0;
  {
    std::istringstream in(which);
    for (std::string item; std::getline(in, item, ',');) {
      if (item == "all") p.figures |= 7u;
      else if (item == "recurring") p.figures |= 1u;
      else if (item == "new_similar") p.figures |= 2u;
      else if (item == "new_dissimilar") p.figures |= 4u;
      else throw ConfigError("field 'which': unknown figure '" + item + "'");
    }
  }
  if (p.figures == 0) throw ConfigError("field 'which': no figure selected");
  if (p.reps < 3) throw ConfigError("field 'reps': figure sweeps need at least 3 replicates");
  p.k = cfg.size("k");
  p.b = cfg.size("b");
  p.r = cfg.size("r");
  p.t_max = cfg.size("t_max");
  p.alpha = cfg.real("alpha");
  p.beta_cap = cfg.real("beta_cap");
  p.reg = cfg.real("reg");
  p.radius = cfg.real("radius");
  p.mc_population = cfg.size("mc_population");
  p.population_multiplier = cfg.size("population_multiplier");
  p.seed = cfg.u64("seed");

  Run run("reproduce-figures", cfg);
  ReportHandle r;
  check(ms_figures_run(&p, &r.p));
  ms_constants constants;
  check(ms_report_constants(r.p, &constants));
  warn_alpha(constants, p.alpha);
  run.manifest()["constants"] = constants_json(constants);
  double beta = 0.0;
  check(ms_report_value(r.p, "beta_cap", &beta));
  run.manifest()["resolved_beta_cap"] = beta;
  const std::string csv = report_csv(r.p, "main");
  const std::string trends = report_csv(r.p, "trends");
  run.write("figures.csv", csv);
  run.write("trends.csv", trends);
  write_charts(run, csv);
  std::cout << trends;
  run.finish();
  return 0;
}

int cmd_plot(const Config& cfg) {
  const std::string path = cfg.text("csv");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read sweep CSV '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  Run run("plot", cfg);
  write_charts(run, ss.str());
  run.finish();
  return 0;
}

constexpr const char* kSchema = R"(tasks file (gen-tasks)
  line 1: d n m
  then one line per sample: task_index split x_1 ... x_d y   (split is in or out)
iterates.txt (train, fed-train)
  line 1: last iterate, line 2: averaged iterate; %.17g decimals
trace.csv (train, fed-train)
  t         round index
  beta_t    stepsize at round t
  fhat      empirical objective at t (record-loss only)
  u_t,v_t   batch-overlap counts (when recorded)
local_trace.csv (fed-train --verbose-trace)
  round,user,local_step,beta_t,norm   norm of the local iterate
errors.csv (train --error-report)
  test      population minus population-minimum objective
  gen       population minus empirical objective
  train     empirical objective minus its minimum
  emp_min   minimum of the empirical objective
  pop_min   minimum of the population objective
  se_test,se_gen   Monte Carlo standard errors
personalization.csv (fed-train --personalize)
  user,loss,se   post-adaptation population loss per user; last row `mean`
stability.csv
  m,n,gamma_hat,se,mean_divergence,gamma_theory
  trailing `# summary` line: gamma_hat, gamma_theory, fitted_slope, input_hash
shift.csv
  seen_index,tv,se   TV distance from the unseen task to each seen task
  trailing `# summary` line: tv_to_mixture, tv_to_mixture_se, d_bound,
  weighted_d_bound (when weights given), largek_gamma, input_hash
figures.csv (reproduce-figures)
  figure,m,n,error_mean,error_se
trends.csv (reproduce-figures)
  figure,direction,slope,se   slope of test error against log m or log n
manifest.json
  command, version, config echo, config_hash, constants, collection_hash,
  wall_clock_seconds, outputs
)";

struct Command {
  std::string name;
  std::string help;
  std::vector<Field> fields;
  std::function<int(const Config&)> run;
};

int exit_code_for(ms_status status) {
  switch (status) {
    case MS_ERR_DIVERGENCE: return kExitDivergence;
    case MS_ERR_PREMISE: return kExitPremise;
    case MS_ERR_INVALID_ARGUMENT:
    case MS_ERR_INVALID_DIMENSION:
    case MS_ERR_INVALID_SIZE:
    case MS_ERR_INVALID_PERTURBATION:
    case MS_ERR_DIMENSION_MISMATCH:
    case MS_ERR_EMPTY_BATCH:
    case MS_ERR_INVALID_WEIGHTS:
    case MS_ERR_PARSE: return kExitConfig;
    default: return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Command> commands = {
      {"gen-tasks", "generate and save a task collection",
       join({common_fields(), family_fields(),
             {{"m", "number of tasks", "", false},
              {"n", "samples per split and task", "", false},
              {"file", "task file name inside the output directory", "tasks.txt", false}}}),
       cmd_gen_tasks},
      {"train", "run MAML", join({common_fields(), family_fields(), train_fields(false)}),
       [](const Config& c) { return cmd_train(c, false); }},
      {"fed-train", "run distributed MAML with local steps", join({common_fields(), family_fields(), train_fields(true)}),
       [](const Config& c) { return cmd_train(c, true); }},
      {"stability", "estimate uniform stability over an (m, n) grid",
       join({common_fields(), family_fields(), stability_fields()}), cmd_stability},
      {"shift", "total-variation distances and shift bounds for an unseen task",
       join({common_fields(), family_fields(), shift_fields()}), cmd_shift},
      {"reproduce-figures", "test-error sweeps over m and n with CSV and SVG output",
       join({common_fields(), family_fields(), figure_fields()}), cmd_reproduce_figures},
      {"plot", "redraw sweep charts from a figures CSV",
       {{"config", "flat `key = value` file; flags override it", "", false},
        {"out", "output directory", ".", false},
        {"csv", "sweep CSV written by reproduce-figures", "", false}},
       cmd_plot},
  };

  CLI::App app{"metastab: MAML stability, generalization and distribution-shift experiments"};
  app.set_version_flag("--version", std::string(ms_version()));
  bool schema = false;
  app.add_flag("--schema", schema, "describe every output file and CSV column");
  app.require_subcommand(0, 1);

  std::vector<std::unique_ptr<Config>> configs;
  std::vector<std::string> config_paths(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto& cmd = commands[i];
    configs.push_back(std::make_unique<Config>(cmd.fields));
    Config* cfg = configs.back().get();
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    subs.push_back(sub);
    for (const auto& field : cmd.fields) {
      std::string flag = "--" + field.key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      std::string help = field.help;
      if (!field.fallback.empty()) help += " [" + field.fallback + "]";
      if (field.key == "config") {
        sub->add_option(flag, config_paths[i], help);
      } else if (field.flag) {
        const std::string key = field.key;
        sub->add_flag_function(flag, [cfg, key](std::int64_t count) { cfg->set_override(key, count > 0 ? "true" : "false"); },
                               help);
      } else {
        const std::string key = field.key;
        sub->add_option_function<std::string>(flag, [cfg, key](const std::string& v) { cfg->set_override(key, v); },
                                              help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (schema) {
    std::cout << kSchema;
    return 0;
  }
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      if (!config_paths[i].empty()) configs[i]->load_file(config_paths[i]);
      return commands[i].run(*configs[i]);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const LibraryError& e) {
      if (e.status == MS_ERR_DIVERGENCE) {
        long round = -1, user = -1, step = -1;
        ms_last_divergence(&round, &user, &step);
        std::cerr << "divergence at round " << round << ", user " << user << ", local step " << step << ": "
                  << e.what() << "\n";
      } else {
        std::cerr << ms_status_name(e.status) << ": " << e.what() << "\n";
      }
      return exit_code_for(e.status);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  std::cout << app.help();
  return kExitConfig;
}
