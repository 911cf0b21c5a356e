#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/task_model.hpp"
#include "core/types.hpp"

namespace metastab {

/// Curvature and boundedness constants (mu, L, G, rho, M) of a loss over W.
struct LossConstants {
  double mu = 0.0;
  double smooth = 0.0;
  double grad_bound = 0.0;
  double hess_lip = 0.0;
  double value_bound = 0.0;

  void validate() const;
};

/// Closed Euclidean ball {w : ||w - center|| <= radius}. An infinite radius
/// makes projection the identity.
struct ConstraintSet {
  double radius = 10.0;
  Vector center;

  static ConstraintSet ball(int dim, double radius);
  static ConstraintSet unbounded(int dim);
  bool bounded() const { return std::isfinite(radius); }
  bool contains(const Vector& w, double tol = 0.0) const;
  double diameter() const { return 2.0 * radius; }
  void validate() const;
};

/// Analytic curvature data a loss can report about itself.
struct Curvature {
  double mu = 0.0;
  double smooth = 0.0;
  double hess_lip = 0.0;
};

using Batch = std::vector<const Sample*>;

/// Per-sample loss l(w, z) with first and second derivatives. Implementations
/// accumulate into caller buffers so batch loops do not allocate.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual double value(const Vector& w, const Sample& z) const = 0;
  virtual void add_gradient(const Vector& w, const Sample& z, double scale, Vector& out) const = 0;
  virtual void add_hessian(const Vector& w, const Sample& z, double scale, Matrix& out) const = 0;

  /// True when the Hessian does not depend on w (rho = 0); the meta-loss is
  /// then an exact quadratic in w.
  virtual bool constant_hessian() const { return false; }
  /// Strong-convexity constant used by the stepsize schedule.
  virtual double strong_convexity() const = 0;
  /// mu, L and rho given an envelope bound on ||x||.
  virtual Curvature curvature(double x_max) const = 0;
  virtual std::string name() const = 0;

  Vector gradient(const Vector& w, const Sample& z) const;
  Matrix hessian(const Vector& w, const Sample& z) const;

  double mean_value(const Vector& w, const Batch& batch) const;
  Vector mean_gradient(const Vector& w, const Batch& batch) const;
  Matrix mean_hessian(const Vector& w, const Batch& batch) const;
};

/// l(w, (x, y)) = (w.x - y)^2 + reg * ||w||^2.
class RegularizedQuadratic final : public LossModel {
 public:
  explicit RegularizedQuadratic(double reg);

  double reg() const { return reg_; }

  double value(const Vector& w, const Sample& z) const override;
  void add_gradient(const Vector& w, const Sample& z, double scale, Vector& out) const override;
  void add_hessian(const Vector& w, const Sample& z, double scale, Matrix& out) const override;
  bool constant_hessian() const override { return true; }
  double strong_convexity() const override { return 2.0 * reg_; }
  Curvature curvature(double x_max) const override;
  std::string name() const override { return "regularized_quadratic"; }

 private:
  double reg_;
};

double quad_value(const Vector& w, const Sample& z, double reg);
Vector quad_gradient(const Vector& w, const Sample& z, double reg);
Matrix quad_hessian(const Vector& w, const Sample& z, double reg);

Batch batch_of(std::span<const Sample> samples);

/// One inner adaptation step w - alpha * mean gradient over the batch. The
/// adapted point is deliberately left unprojected.
Vector adapt(const Vector& w, const Batch& batch, double alpha, const LossModel& loss);
Vector adapt(const Vector& w, std::span<const Sample> batch, double alpha, const LossModel& loss);

Vector project(const Vector& w, const ConstraintSet& set);

/// Uniform point of the ball; with `on_boundary` it lies on the sphere.
Vector sample_in_ball(const ConstraintSet& set, Stream& rng, bool on_boundary);

/// Quantile of ||x|| under N(mean, s I), via the noncentral chi-square law.
double feature_norm_quantile(const TaskSpec& task, double probability);

struct ConstantsOptions {
  double envelope_probability = 0.99999;
  double safety = 1.2;
};

/// mu, L and rho come from the loss's analytic curvature on the truncated
/// feature envelope; G and M are probe suprema over (w in W, z) inflated by
/// the safety factor.
LossConstants compute_constants(const LossModel& loss, const ConstraintSet& set, std::span<const TaskSpec> tasks,
                                int probes, Stream& rng, const ConstantsOptions& options = {});

/// Same constants for a collection without task laws: the envelope is the
/// largest sample norm and probes draw z from the stored samples.
LossConstants compute_constants_from_samples(const LossModel& loss, const ConstraintSet& set,
                                             const TaskCollection& collection, int probes, Stream& rng,
                                             const ConstantsOptions& options = {});

/// min(1/(2L), mu/(8 rho G)); the second term is +inf when rho = 0.
double admissible_alpha(const LossConstants& c);

/// Smoothness bound 4L + 2 alpha rho G of the adapted loss.
double meta_smoothness(const LossConstants& c, double alpha);

}  // namespace metastab
