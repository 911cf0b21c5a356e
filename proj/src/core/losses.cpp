#include "core/losses.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>

#include "core/errors.hpp"

namespace metastab {

void LossConstants::validate() const {
  require(mu > 0.0, ErrorCode::InvalidArgument, "strong convexity mu must be positive");
  require(mu <= smooth, ErrorCode::InvalidArgument, "mu must not exceed the smoothness constant");
  require(grad_bound > 0.0 && value_bound > 0.0 && hess_lip >= 0.0, ErrorCode::InvalidArgument,
          "loss constants must be nonnegative (G, M positive)");
}

ConstraintSet ConstraintSet::ball(int dim, double radius) {
  ConstraintSet set;
  set.radius = radius;
  set.center = Vector::Zero(dim);
  set.validate();
  return set;
}

ConstraintSet ConstraintSet::unbounded(int dim) {
  return ball(dim, std::numeric_limits<double>::infinity());
}

void ConstraintSet::validate() const {
  require(radius > 0.0, ErrorCode::InvalidArgument, "constraint radius must be positive");
}

bool ConstraintSet::contains(const Vector& w, double tol) const {
  if (!bounded()) return true;
  return (w - center).norm() <= radius + tol;
}

Vector LossModel::gradient(const Vector& w, const Sample& z) const {
  Vector g = Vector::Zero(w.size());
  add_gradient(w, z, 1.0, g);
  return g;
}

Matrix LossModel::hessian(const Vector& w, const Sample& z) const {
  Matrix h = Matrix::Zero(w.size(), w.size());
  add_hessian(w, z, 1.0, h);
  return h;
}

double LossModel::mean_value(const Vector& w, const Batch& batch) const {
  require(!batch.empty(), ErrorCode::EmptyBatch, "batch must be nonempty");
  double total = 0.0;
  for (const Sample* z : batch) total += value(w, *z);
  return total / static_cast<double>(batch.size());
}

Vector LossModel::mean_gradient(const Vector& w, const Batch& batch) const {
  require(!batch.empty(), ErrorCode::EmptyBatch, "batch must be nonempty");
  Vector g = Vector::Zero(w.size());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const Sample* z : batch) add_gradient(w, *z, scale, g);
  return g;
}

Matrix LossModel::mean_hessian(const Vector& w, const Batch& batch) const {
  require(!batch.empty(), ErrorCode::EmptyBatch, "batch must be nonempty");
  Matrix h = Matrix::Zero(w.size(), w.size());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const Sample* z : batch) add_hessian(w, *z, scale, h);
  return h;
}

RegularizedQuadratic::RegularizedQuadratic(double reg) : reg_(reg) {
  require(reg >= 0.0, ErrorCode::InvalidArgument, "regularization must be nonnegative");
}

namespace {

void check_dims(const Vector& w, const Sample& z) {
  require(w.size() == z.x.size(), ErrorCode::DimensionMismatch, "parameter and feature dimensions differ");
}

}  // namespace

double RegularizedQuadratic::value(const Vector& w, const Sample& z) const {
  check_dims(w, z);
  const double residual = w.dot(z.x) - z.y;
  return residual * residual + reg_ * w.squaredNorm();
}

void RegularizedQuadratic::add_gradient(const Vector& w, const Sample& z, double scale, Vector& out) const {
  check_dims(w, z);
  const double residual = w.dot(z.x) - z.y;
  out.noalias() += (2.0 * scale * residual) * z.x;
  out.noalias() += (2.0 * scale * reg_) * w;
}

void RegularizedQuadratic::add_hessian(const Vector& w, const Sample& z, double scale, Matrix& out) const {
  check_dims(w, z);
  out.noalias() += (2.0 * scale) * z.x * z.x.transpose();
  out.diagonal().array() += 2.0 * scale * reg_;
}

Curvature RegularizedQuadratic::curvature(double x_max) const {
  return {2.0 * reg_, 2.0 * (x_max * x_max + reg_), 0.0};
}

double quad_value(const Vector& w, const Sample& z, double reg) { return RegularizedQuadratic(reg).value(w, z); }
Vector quad_gradient(const Vector& w, const Sample& z, double reg) { return RegularizedQuadratic(reg).gradient(w, z); }
Matrix quad_hessian(const Vector& w, const Sample& z, double reg) { return RegularizedQuadratic(reg).hessian(w, z); }

Batch batch_of(std::span<const Sample> samples) {
  Batch batch;
  batch.reserve(samples.size());
  for (const auto& s : samples) batch.push_back(&s);
  return batch;
}

Vector adapt(const Vector& w, const Batch& batch, double alpha, const LossModel& loss) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "adaptation batch must be nonempty");
  require(alpha >= 0.0, ErrorCode::InvalidArgument, "inner stepsize alpha must be nonnegative");
  if (alpha == 0.0) return w;
  return w - alpha * loss.mean_gradient(w, batch);
}

Vector adapt(const Vector& w, std::span<const Sample> batch, double alpha, const LossModel& loss) {
  return adapt(w, batch_of(batch), alpha, loss);
}

Vector project(const Vector& w, const ConstraintSet& set) {
  if (!set.bounded()) return w;
  require(w.size() == set.center.size(), ErrorCode::DimensionMismatch, "projection dimension mismatch");
  const Vector offset = w - set.center;
  const double dist = offset.norm();
  if (dist <= set.radius) return w;
  return set.center + (set.radius / dist) * offset;
}

Vector sample_in_ball(const ConstraintSet& set, Stream& rng, bool on_boundary) {
  require(set.bounded(), ErrorCode::Unsupported, "cannot sample from an unbounded constraint set");
  const auto d = set.center.size();
  Vector dir(d);
  for (Eigen::Index j = 0; j < d; ++j) dir[j] = rng.normal();
  dir /= dir.norm();
  const double radius = on_boundary ? set.radius : set.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return set.center + radius * dir;
}

double feature_norm_quantile(const TaskSpec& task, double probability) {
  if (task.feature_cov_scale == 0.0) return task.mean.norm();
  const double s = task.feature_cov_scale;
  const double dof = static_cast<double>(task.dim());
  const double noncentrality = task.mean.squaredNorm() / s;
  double q = 0.0;
  if (noncentrality == 0.0) {
    q = boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), probability);
  } else {
    q = boost::math::quantile(boost::math::non_central_chi_squared_distribution<double>(dof, noncentrality),
                              probability);
  }
  return std::sqrt(s * q);
}

LossConstants compute_constants(const LossModel& loss, const ConstraintSet& set, std::span<const TaskSpec> tasks,
                                int probes, Stream& rng, const ConstantsOptions& options) {
  require(probes >= 1, ErrorCode::InvalidArgument, "constant estimation needs at least one probe");
  require(!tasks.empty(), ErrorCode::InvalidArgument, "constant estimation needs at least one task law");
  require(set.bounded(), ErrorCode::Unsupported, "G and M are only defined over a bounded constraint set");

  double x_max = 0.0;
  for (const auto& task : tasks) x_max = std::max(x_max, feature_norm_quantile(task, options.envelope_probability));
  const Curvature curv = loss.curvature(x_max);

  double grad_sup = 0.0;
  double value_sup = 0.0;
  Vector g(set.center.size());
  for (int p = 0; p < probes; ++p) {
    const TaskSpec& task = tasks[rng.below(tasks.size())];
    const Vector w = sample_in_ball(set, rng, p % 2 == 0);
    const Sample z = sample_point(task, rng);
    g.setZero();
    loss.add_gradient(w, z, 1.0, g);
    grad_sup = std::max(grad_sup, g.norm());
    value_sup = std::max(value_sup, std::abs(loss.value(w, z)));
  }

  LossConstants c;
  c.mu = curv.mu;
  c.smooth = curv.smooth;
  c.hess_lip = curv.hess_lip;
  c.grad_bound = options.safety * grad_sup;
  c.value_bound = options.safety * value_sup;
  return c;
}

LossConstants compute_constants_from_samples(const LossModel& loss, const ConstraintSet& set,
                                             const TaskCollection& collection, int probes, Stream& rng,
                                             const ConstantsOptions& options) {
  require(probes >= 1, ErrorCode::InvalidArgument, "constant estimation needs at least one probe");
  require(set.bounded(), ErrorCode::Unsupported, "G and M are only defined over a bounded constraint set");
  collection.validate();
  std::vector<const Sample*> pool;
  double x_max = 0.0;
  for (const auto& ds : collection.datasets) {
    for (const auto* split : {&ds.inner, &ds.outer}) {
      for (const auto& s : *split) {
        pool.push_back(&s);
        x_max = std::max(x_max, s.x.norm());
      }
    }
  }
  const Curvature curv = loss.curvature(x_max);
  double grad_sup = 0.0;
  double value_sup = 0.0;
  Vector g(set.center.size());
  for (int p = 0; p < probes; ++p) {
    const Sample& z = *pool[rng.below(pool.size())];
    const Vector w = sample_in_ball(set, rng, p % 2 == 0);
    g.setZero();
    loss.add_gradient(w, z, 1.0, g);
    grad_sup = std::max(grad_sup, g.norm());
    value_sup = std::max(value_sup, std::abs(loss.value(w, z)));
  }
  return {curv.mu, curv.smooth, options.safety * grad_sup, curv.hess_lip, options.safety * value_sup};
}

double admissible_alpha(const LossConstants& c) {
  const double first = 1.0 / (2.0 * c.smooth);
  if (c.hess_lip == 0.0) return first;
  return std::min(first, c.mu / (8.0 * c.hess_lip * c.grad_bound));
}

double meta_smoothness(const LossConstants& c, double alpha) {
  return 4.0 * c.smooth + 2.0 * alpha * c.hess_lip * c.grad_bound;
}

}  // namespace metastab
