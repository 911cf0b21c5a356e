#include "core/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "core/analysis.hpp"
#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/trainer.hpp"

namespace metastab {

const char* figure_name(FigureKind kind) {
  switch (kind) {
    case FigureKind::Recurring: return "recurring";
    case FigureKind::NewSimilar: return "new_similar";
    case FigureKind::NewDissimilar: return "new_dissimilar";
  }
  return "unknown";
}

FigureKind parse_figure(const std::string& name) {
  if (name == "recurring") return FigureKind::Recurring;
  if (name == "new_similar") return FigureKind::NewSimilar;
  if (name == "new_dissimilar") return FigureKind::NewDissimilar;
  fail(ErrorCode::InvalidArgument, "unknown figure '" + name + "' (expected recurring, new_similar, new_dissimilar)");
}

void SweepConfig::validate() const {
  require(!ms.empty() && !ns.empty() && !figures.empty(), ErrorCode::InvalidArgument, "sweep grid is empty");
  require(reps >= 3, ErrorCode::InvalidArgument, "figure sweeps need reps >= 3");
  for (std::size_t n : ns) require(n >= k, ErrorCode::InvalidArgument, "every n in the grid must be at least K");
  for (std::size_t m : ms) require(m >= 1, ErrorCode::InvalidArgument, "every m in the grid must be positive");
  require(population_multiplier >= 1 && mc_population >= 1 && t_max >= 1, ErrorCode::InvalidArgument,
          "sweep sizes must be positive");
}

const SweepCell& SweepResult::cell(FigureKind figure, std::size_t m, std::size_t n) const {
  for (const auto& c : cells) {
    if (c.figure == figure && c.m == m && c.n == n) return c;
  }
  fail(ErrorCode::InvalidArgument, "no such sweep cell");
}

const TrendEstimate& SweepResult::trend(FigureKind figure, const std::string& direction) const {
  for (const auto& t : trends) {
    if (t.figure == figure && t.direction == direction) return t;
  }
  fail(ErrorCode::InvalidArgument, "no such sweep trend");
}

namespace {

struct Replicate {
  std::uint64_t seed = 0;
  std::vector<TaskSpec> seen;
  TaskSpec similar;
  TaskSpec dissimilar;
  /// Fresh-data quadratic surrogates used for the reference minimizers.
  std::vector<QuadraticForm> seen_forms;
  QuadraticForm similar_form;
  QuadraticForm dissimilar_form;
};

QuadraticForm reference_form(const TaskSpec& task, std::size_t n_ref, std::uint64_t seed, std::size_t index,
                             const MetaConfig& meta, const LossModel& loss) {
  Stream rng(seed, index, Purpose::Population);
  return empirical_meta_quadratic(build_dataset(task, n_ref, rng), meta, loss);
}

QuadraticForm mean_form(const std::vector<QuadraticForm>& forms, std::size_t m) {
  QuadraticForm out{Matrix::Zero(forms.front().hessian.rows(), forms.front().hessian.cols()),
                    Vector::Zero(forms.front().linear.size()), 0.0};
  for (std::size_t i = 0; i < m; ++i) {
    out.hessian += forms[i].hessian / static_cast<double>(m);
    out.linear += forms[i].linear / static_cast<double>(m);
    out.constant += forms[i].constant / static_cast<double>(m);
  }
  return out;
}

double std_error(const std::vector<double>& values) {
  RunningStats s;
  for (double v : values) s.add(v);
  return s.stderr_of_mean();
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const RegularizedQuadratic loss(cfg.reg);
  const std::size_t m_max = *std::max_element(cfg.ms.begin(), cfg.ms.end());
  const std::size_t n_max = *std::max_element(cfg.ns.begin(), cfg.ns.end());
  const std::size_t n_ref = cfg.population_multiplier * n_max;
  const int d = cfg.family.dim;

  MetaConfig meta;
  meta.alpha = cfg.alpha;
  meta.k = cfg.k;
  meta.mc_population = cfg.mc_population;

  std::vector<Replicate> reps(cfg.reps);
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    Replicate& rep = reps[r];
    rep.seed = combine_keys(cfg.seed, combine_keys(static_cast<std::uint64_t>(Purpose::Replicate), r));
    FamilyRecipe recipe = cfg.family;
    recipe.seed = rep.seed;
    for (std::size_t i = 0; i < m_max; ++i) rep.seen.push_back(family_task(recipe, i, TaskMode::Similar));
    rep.similar = family_task(recipe, kUnseenSimilarIndex, TaskMode::Similar);
    rep.dissimilar = family_task(recipe, kUnseenDissimilarIndex, TaskMode::Dissimilar);
    rep.seen_forms.resize(m_max);
  }

  // Constants from the first replicate's laws fix one stepsize for the sweep.
  SweepResult result;
  {
    std::vector<TaskSpec> laws = reps.front().seen;
    laws.push_back(reps.front().similar);
    laws.push_back(reps.front().dissimilar);
    Stream rng(cfg.seed, 0, Purpose::Constants);
    result.constants =
        compute_constants(loss, ConstraintSet::ball(d, cfg.radius), laws, static_cast<int>(cfg.constant_probes), rng);
  }
  result.beta_cap = cfg.beta_cap > 0.0 ? cfg.beta_cap : 1.0 / (4.0 * result.constants.smooth);

  // Reference surrogates: m_max seen tasks plus the two unseen ones per replicate.
  const std::size_t per_rep = m_max + 2;
  parallel_for(cfg.reps * per_rep, [&](std::size_t job) {
    Replicate& rep = reps[job / per_rep];
    const std::size_t j = job % per_rep;
    if (j < m_max) {
      rep.seen_forms[j] = reference_form(rep.seen[j], n_ref, rep.seed, j, meta, loss);
    } else if (j == m_max) {
      rep.similar_form = reference_form(rep.similar, n_ref, rep.seed, kUnseenSimilarIndex, meta, loss);
    } else {
      rep.dissimilar_form = reference_form(rep.dissimilar, n_ref, rep.seed, kUnseenDissimilarIndex, meta, loss);
    }
  });

  struct Job {
    std::size_t rep;
    std::size_t mi;
    std::size_t ni;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    for (std::size_t mi = 0; mi < cfg.ms.size(); ++mi) {
      for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) jobs.push_back({r, mi, ni});
    }
  }
  const std::size_t nf = cfg.figures.size();
  std::vector<std::vector<double>> values(jobs.size(), std::vector<double>(nf, 0.0));
  const ConstraintSet set = ConstraintSet::ball(d, cfg.radius);

  parallel_for(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    const Replicate& rep = reps[job.rep];
    const std::size_t m = cfg.ms[job.mi];
    const std::size_t n = cfg.ns[job.ni];
    std::vector<TaskSpec> specs(rep.seen.begin(), rep.seen.begin() + static_cast<std::ptrdiff_t>(m));
    const TaskCollection collection = collection_from_specs(std::move(specs), n, rep.seed);

    TrainerConfig tc;
    tc.m = m;
    tc.n = n;
    tc.k = cfg.k;
    tc.b = cfg.b;
    tc.r = cfg.r == 0 ? m : std::min(cfg.r, m);
    tc.t_max = cfg.t_max;
    tc.alpha = cfg.alpha;
    tc.beta_cap = result.beta_cap;
    tc.seed = rep.seed;
    tc.constraint = set;
    const Vector w = maml_train(collection, tc, loss).averaged_iterate;

    for (std::size_t f = 0; f < nf; ++f) {
      double error = 0.0;
      switch (cfg.figures[f]) {
        case FigureKind::Recurring: {
          const Vector w_ref = minimize_quadratic(mean_form(rep.seen_forms, m), set, 1e-9).w;
          for (std::size_t i = 0; i < m; ++i) {
            Stream rng(rep.seed, i, Purpose::Evaluation);
            error += population_meta_loss_paired(w, w_ref, rep.seen[i], meta, loss, rng).difference.mean /
                     static_cast<double>(m);
          }
          break;
        }
        case FigureKind::NewSimilar: {
          const Vector w_ref = minimize_quadratic(rep.similar_form, set, 1e-9).w;
          Stream rng(rep.seed, kUnseenSimilarIndex, Purpose::Evaluation);
          error = population_meta_loss_paired(w, w_ref, rep.similar, meta, loss, rng).difference.mean;
          break;
        }
        case FigureKind::NewDissimilar: {
          const Vector w_ref = minimize_quadratic(rep.dissimilar_form, set, 1e-9).w;
          Stream rng(rep.seed, kUnseenDissimilarIndex, Purpose::Evaluation);
          error = population_meta_loss_paired(w, w_ref, rep.dissimilar, meta, loss, rng).difference.mean;
          break;
        }
      }
      values[j][f] = error;
    }
  });

  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t mi = 0; mi < cfg.ms.size(); ++mi) {
      for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
        SweepCell cell;
        cell.figure = cfg.figures[f];
        cell.m = cfg.ms[mi];
        cell.n = cfg.ns[ni];
        for (std::size_t j = 0; j < jobs.size(); ++j) {
          if (jobs[j].mi == mi && jobs[j].ni == ni) cell.per_rep.push_back(values[j][f]);
        }
        RunningStats s;
        for (double v : cell.per_rep) s.add(v);
        cell.mean = s.mean();
        cell.se = s.stderr_of_mean();
        result.cells.push_back(std::move(cell));
      }
    }
  }
  result.trends = sweep_trends(result.cells, cfg);
  return result;
}

std::vector<TrendEstimate> sweep_trends(const std::vector<SweepCell>& cells, const SweepConfig& cfg) {
  std::vector<TrendEstimate> out;
  auto find = [&](FigureKind f, std::size_t m, std::size_t n) -> const SweepCell* {
    for (const auto& c : cells) {
      if (c.figure == f && c.m == m && c.n == n) return &c;
    }
    return nullptr;
  };
  for (FigureKind f : cfg.figures) {
    for (const std::string direction : {"m", "n"}) {
      const auto& axis = direction == "m" ? cfg.ms : cfg.ns;
      const auto& other = direction == "m" ? cfg.ns : cfg.ms;
      if (axis.size() < 2) continue;
      std::vector<double> slopes;
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        std::vector<double> x, y;
        for (std::size_t a : axis) {
          double mean = 0.0;
          for (std::size_t o : other) {
            const SweepCell* c = direction == "m" ? find(f, a, o) : find(f, o, a);
            require(c != nullptr && c->per_rep.size() == cfg.reps, ErrorCode::InvalidArgument,
                    "incomplete sweep grid");
            mean += c->per_rep[r] / static_cast<double>(other.size());
          }
          x.push_back(std::log(static_cast<double>(a)));
          y.push_back(mean);
        }
        slopes.push_back(fit_slope(x, y));
      }
      RunningStats s;
      for (double v : slopes) s.add(v);
      out.push_back({f, direction, s.mean(), std_error(slopes)});
    }
  }
  return out;
}

}  // namespace metastab
