#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ssms/model.hpp"

namespace ssms {

enum class StarSampling { UniformGrid, UniformRandom };

// Five-pointed star family with a known intersection. Model 1 varies points
// 0 and 2 over [base-a, base+b], model 2 varies points 0 and 3 over
// [base-c, base+a]; the overlap [base-a, base+a] on point 0 alone is the
// ground-truth intersection. All angles in degrees.
struct StarSpec {
  double r = 4.0;
  std::array<double, 5> base_angles = {90.0, 234.0, 18.0, 162.0, 306.0};
  double a = 5.0;
  double b = 40.0;
  double c = 20.0;
  int n_train = 2000;
  StarSampling sampling = StarSampling::UniformGrid;
  std::uint64_t seed = 0;
  QPolicy q_policy = VarianceFraction{1.0};
};

// Interval half-widths (a, b, c) for the six preset benchmark configurations.
StarSpec star_row_spec(int row);

struct StarModels {
  ShapeModel m1;
  ShapeModel m2;
  ShapeModel gt_intersection;
  std::vector<Shape> gt_diff12;
  std::vector<Shape> gt_diff21;
};

Shape star_shape(const StarSpec& spec, const std::array<double, 5>& angles);

StarModels generate_star_models(const StarSpec& spec);

// High-dimensional synthetic pair sharing q_I basis vectors. A random
// orthonormal set is partitioned into S1, S2, SI; model 1 spans S1 and SI,
// model 2 spans S2 and SI, the ground truth intersection spans SI alone.
// Empty eigenvalue_pool means unit eigenvalues; otherwise the pool values
// are assigned to the shuffled vectors in order, giving every subset a
// random slice of the spectrum.
struct SplitSpec {
  int ambient_dim = 5238;
  int q1_unique = 3;
  int q2_unique = 3;
  int q_shared = 1;
  std::uint64_t seed = 0;
  std::vector<double> eigenvalue_pool;
  double mean_norm = 100.0;
};

// Decaying spectrum lambda_j = scale / j for j = 1..count.
std::vector<double> harmonic_eigenvalues(int count, double scale);

struct SplitModels {
  ShapeModel m1;
  ShapeModel m2;
  ShapeModel gt_intersection;
};

SplitModels generate_split_models(const SplitSpec& spec);

}  // namespace ssms
