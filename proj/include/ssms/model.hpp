#pragma once

#include <variant>
#include <vector>

#include "ssms/types.hpp"

namespace ssms {

// Linear shape model x = mean + basis * alpha. Basis columns are scaled
// eigenvectors sqrt(lambda_i) * u_i, so they are orthogonal but not
// orthonormal; column i has squared norm eigenvalues[i]. The covariance is
// never materialized, everything runs in coefficient space.
struct ShapeModel {
  Shape mean;
  Mat basis;        // (d*n) x q, column-major scaled eigenvectors
  Vec eigenvalues;  // length q, descending, all > 0

  int d() const { return mean.d; }
  int n() const { return mean.n; }
  int q() const { return static_cast<int>(eigenvalues.size()); }
};

struct PerVertexVariance {
  Vec values;  // length n, sum of per-coordinate variances at each vertex
};

// Retained-dimension policy for PCA construction: either keep a fixed count
// or keep the smallest q whose cumulative explained variance reaches the
// given fraction. Components below 1e-12 * lambda_1 are dropped first.
struct FixedCount {
  int q;
};
struct VarianceFraction {
  double fraction;  // in (0, 1]
};
using QPolicy = std::variant<FixedCount, VarianceFraction>;

void validate_model(const ShapeModel& m, double tol = 1e-8);

Shape synthesize(const ShapeModel& m, const Coefficients& alpha);

// Least-squares coefficients of x in m: alpha_i = u_i . (x - mean) / sqrt(l_i),
// the pseudo-inverse action for a scaled orthogonal basis.
Coefficients project(const ShapeModel& m, const Shape& x);

inline double log_prior(const Coefficients& alpha) {
  return -0.5 * alpha.squaredNorm();
}

ShapeModel build_pca(const std::vector<Shape>& samples, const QPolicy& policy);

// PCA restricted to the affine subspace through the sample mean spanned by
// the given directions. Exact when every sample lies in that subspace (true
// for samples synthesized from models whose basis columns are included) and
// much cheaper than the ambient routes when it is low dimensional; any
// residual outside the span is dropped.
ShapeModel build_pca_in_span(const std::vector<Shape>& samples,
                             const Mat& directions, const QPolicy& policy);

ShapeModel align_procrustes(const ShapeModel& moving, const ShapeModel& fixed);

ShapeModel truncate(const ShapeModel& m, int q_new);

PerVertexVariance per_vertex_variance(const std::vector<Shape>& samples);

}  // namespace ssms
