#pragma once

#include <functional>

#include "core/losses.hpp"
#include "core/rng.hpp"
#include "core/task_model.hpp"
#include "core/types.hpp"

namespace metastab::testing {

inline TaskCollection small_collection(std::size_t m, std::size_t n, int dim = 3, std::uint64_t seed = 11) {
  FamilyRecipe r;
  r.dim = dim;
  r.seed = seed;
  return generate_collection(r, m, n);
}

inline Vector random_vector(int dim, Stream& rng, double scale = 1.0) {
  Vector v(dim);
  for (int j = 0; j < dim; ++j) v[j] = scale * rng.normal();
  return v;
}

/// Central differences of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& w, double h = 1e-5) {
  Vector g(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    Vector a = w, b = w;
    a[j] += h;
    b[j] -= h;
    g[j] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

/// Central differences of a vector function, symmetrized.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& w, double h = 1e-5) {
  Matrix j(w.size(), w.size());
  for (Eigen::Index c = 0; c < w.size(); ++c) {
    Vector a = w, b = w;
    a[c] += h;
    b[c] -= h;
    j.col(c) = (f(a) - f(b)) / (2 * h);
  }
  return 0.5 * (j + j.transpose().eval());
}

inline double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

}  // namespace metastab::testing
