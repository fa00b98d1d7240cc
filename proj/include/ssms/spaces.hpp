#pragma once

#include <limits>
#include <vector>

#include "ssms/metrics.hpp"
#include "ssms/model.hpp"
#include "ssms/sampler.hpp"

namespace ssms {

enum class SampleSource { FromM1, FromM2 };
enum class DiffDirection { OneMinusTwo, TwoMinusOne };

struct IntersectionResult {
  ShapeModel model;           // PCA of the pooled posterior samples
  std::vector<Shape> samples;
  std::vector<SampleSource> provenance;  // parallel to samples
  double epsilon_estimate = 0.0;
  std::vector<double> acceptance_rates;  // all chains, m1 side then m2 side
  bool degenerate = false;               // pooled acceptance below 1 percent
  bool mean_gap_warning = false;         // models look unaligned
  bool start_separation_forced = false;
};

struct DifferenceResult {
  std::vector<Shape> samples;
  DiffDirection direction = DiffDirection::OneMinusTwo;
  double epsilon_estimate = 0.0;
  std::vector<double> acceptance_rates;
  bool degenerate = false;
  bool start_separation_forced = false;
};

// Samples the relaxed intersection from both sides (chains and retention
// split evenly, odd leftovers to the m1 side), pools the shapes, and builds
// the intersection model under q_policy. Models must be pre-aligned; a mean
// gap larger than warn_mean_gap only sets a flag. NaN picks a threshold from
// the models' own leading standard deviations.
IntersectionResult compute_intersection(
    const ShapeModel& m1, const ShapeModel& m2, const LikelihoodConfig& lik,
    const ChainConfig& chains, const ProposalSpec& proposal,
    const QPolicy& q_policy,
    double warn_mean_gap = std::numeric_limits<double>::quiet_NaN(),
    const ChainProgress& progress = {});

// One-sided: samples of m1 that stay away from m2. No PCA.
DifferenceResult compute_difference(const ShapeModel& m1, const ShapeModel& m2,
                                    const LikelihoodConfig& lik,
                                    const ChainConfig& chains,
                                    const ProposalSpec& proposal,
                                    DiffDirection direction =
                                        DiffDirection::OneMinusTwo,
                                    const ChainProgress& progress = {});

// Batch synthesis of retained coefficients, parallel over samples.
std::vector<Shape> synthesize_all(const ShapeModel& m,
                                  const std::vector<Coefficients>& alphas);

namespace reference {
std::vector<Shape> synthesize_all(const ShapeModel& m,
                                  const std::vector<Coefficients>& alphas);
}

}  // namespace ssms
