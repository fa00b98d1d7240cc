#pragma once

#include "ssms/model.hpp"

namespace ssms {

enum class LikelihoodMode { Intersection, Difference };

struct LikelihoodConfig {
  double sigma;  // stddev of the distance likelihood, model units
  LikelihoodMode mode = LikelihoodMode::Intersection;
};

// Mean over vertices of the per-vertex Euclidean distance.
double avg_distance(const Shape& x, const Shape& x_prime);

// log of exp(-0.5 (dist/sigma)^2), i.e. -0.5 (dist/sigma)^2.
double log_distance_likelihood(double dist, const LikelihoodConfig& cfg);

// log(1 - exp(-0.5 (dist/sigma)^2)); -inf at dist = 0. Stable for both
// tiny and large dist via expm1/log1p.
double log_inverted_distance_likelihood(double dist,
                                        const LikelihoodConfig& cfg);

inline double log_projection_likelihood(const Coefficients& alpha_prime) {
  return -0.5 * alpha_prime.squaredNorm();
}

// Combined likelihood of a shape x against the other model. Intersection
// mode: distance likelihood of the projection residual times the projection
// likelihood. Difference mode: inverted distance likelihood only.
double log_likelihood(const Shape& x, const ShapeModel& other,
                      const LikelihoodConfig& cfg);

}  // namespace ssms
