#pragma once

#include <cstdint>
#include <vector>

#include "ssms/model.hpp"

namespace ssms {

// Affine subspace mean + span(basis) with an orthonormal basis.
struct AffineSubspace {
  Mat basis;         // (d*n) x k, orthonormal columns
  Vec displacement;  // d*n
};

AffineSubspace to_affine_subspace(const ShapeModel& m);

// Distance between equal-dimensional affine subspaces: the displacement is
// Gram-Schmidt reduced against the span and normalized, both subspaces are
// lifted to Stiefel coordinates in ambient dimension + 1, and the k+1
// principal angles from the SVD of Y1^T Y2 are returned as their 2-norm.
// Unequal k is an error; truncate the larger model first.
double grassmann_distance(const AffineSubspace& s1, const AffineSubspace& s2);

inline double grassmann_distance(const ShapeModel& m1, const ShapeModel& m2) {
  return grassmann_distance(to_affine_subspace(m1), to_affine_subspace(m2));
}

struct ReconError {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Mean and stddev over samples of the average vertex distance between each
// sample and its projection onto the reference model.
ReconError reconstruction_error(const std::vector<Shape>& samples,
                                const ShapeModel& reference);

// Baseline union model: pool standard normal draws from both models, PCA.
ShapeModel union_model(const ShapeModel& m1, const ShapeModel& m2,
                       int n_samples, const QPolicy& policy,
                       std::uint64_t seed);

namespace reference {
// Plain-loop implementation used to cross-check the parallel one.
ReconError reconstruction_error(const std::vector<Shape>& samples,
                                const ShapeModel& reference);
}  // namespace reference

}  // namespace ssms
