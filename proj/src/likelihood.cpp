#include "ssms/likelihood.hpp"

#include <cmath>
#include <limits>

namespace ssms {

double avg_distance(const Shape& x, const Shape& x_prime) {
  require(x.d == x_prime.d && x.n == x_prime.n,
          "avg_distance: dimension mismatch");
  double acc = 0.0;
  const int d = x.d;
  for (int i = 0; i < x.n; ++i)
    acc += (x.data.segment(i * d, d) - x_prime.data.segment(i * d, d)).norm();
  return acc / x.n;
}

double log_distance_likelihood(double dist, const LikelihoodConfig& cfg) {
  require(cfg.sigma > 0.0, "likelihood: sigma must be > 0");
  double z = dist / cfg.sigma;
  return -0.5 * z * z;
}

double log_inverted_distance_likelihood(double dist,
                                        const LikelihoodConfig& cfg) {
  require(cfg.sigma > 0.0, "likelihood: sigma must be > 0");
  double z = dist / cfg.sigma;
  double e = 0.5 * z * z;
  if (e == 0.0) return -std::numeric_limits<double>::infinity();
  // log(1 - exp(-e)): -expm1(-e) keeps precision near 0 and saturates to 1.
  return std::log(-std::expm1(-e));
}

double log_likelihood(const Shape& x, const ShapeModel& other,
                      const LikelihoodConfig& cfg) {
  Coefficients ap = project(other, x);
  Shape xp = synthesize(other, ap);
  double dist = avg_distance(x, xp);
  if (cfg.mode == LikelihoodMode::Difference)
    return log_inverted_distance_likelihood(dist, cfg);
  return log_distance_likelihood(dist, cfg) + log_projection_likelihood(ap);
}

}  // namespace ssms
