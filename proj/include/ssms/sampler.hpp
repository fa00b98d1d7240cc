#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ssms/likelihood.hpp"
#include "ssms/model.hpp"
#include "ssms/rng.hpp"

namespace ssms {

enum class ProposalKind { IsotropicStep, NormStep };

struct ProposalComponent {
  ProposalKind kind;
  double stddev;
  double weight;
};

// The four-component random walk mixture used throughout: three isotropic
// Gaussian steps of decreasing size plus a norm-rescaling step that redraws
// the vector length while preserving direction.
struct ProposalSpec {
  std::vector<ProposalComponent> components;

  static ProposalSpec defaults() {
    return {{{ProposalKind::IsotropicStep, 0.2, 0.1},
             {ProposalKind::IsotropicStep, 0.1, 0.5},
             {ProposalKind::IsotropicStep, 0.025, 0.2},
             {ProposalKind::NormStep, 0.2, 0.2}}};
  }
};

void validate_proposal(const ProposalSpec& spec);

struct ChainConfig {
  int n_chains = 15;
  int n_samples = 2500;  // steps per chain
  int burn_in = 1000;    // discarded per chain
  int thin_to = 5000;    // total retained over all chains
  std::uint64_t seed = 0;
  double min_start_separation = 0.5;
};

void validate_chain_config(const ChainConfig& cfg);

struct ChainResult {
  std::vector<Coefficients> retained;   // length thin_to, chain order
  std::vector<double> acceptance_rate;  // per chain
  std::vector<std::int64_t> accepted;   // per chain
  std::vector<std::int64_t> proposed;   // per chain
  double mean_projection_distance = 0.0;  // empirical epsilon estimate
  bool start_separation_forced = false;   // resampling gave up at least once
};

Coefficients propose(const Coefficients& current, const ProposalSpec& spec,
                     Rng& rng);

// One Metropolis-Hastings transition. cached_log_post carries the current
// state's log posterior in and the next state's out, so the target is
// evaluated once per step.
std::pair<Coefficients, bool> mh_step(const Coefficients& current,
                                      const ShapeModel& source,
                                      const ShapeModel& other,
                                      const LikelihoodConfig& lik,
                                      const ProposalSpec& spec, Rng& rng,
                                      double& cached_log_post);

// Called when a chain finishes, from whichever thread ran it (serialized);
// completion order is scheduling dependent, results are not.
using ChainProgress = std::function<void(int chain, double acceptance)>;

// Draws chain starts from N(0, I) with separation resampling, runs all
// chains, drops burn-in, and thins the concatenated trace to thin_to by
// uniform stride. Chains run concurrently; results are identical at any
// thread count because every chain owns a seed-derived RNG stream and a
// preassigned output slot.
ChainResult run_ensemble(const ShapeModel& source, const ShapeModel& other,
                         const LikelihoodConfig& lik, const ChainConfig& cfg,
                         const ProposalSpec& proposal,
                         const ChainProgress& progress = {});

// Uniform-stride index set used for thinning: k picks over a length-T trace.
std::vector<std::int64_t> thin_indices(std::int64_t total, std::int64_t keep);

namespace detail {
std::vector<Coefficients> draw_starts(int n_chains, int q,
                                      double min_separation, Rng& rng,
                                      bool& forced);
struct ChainTrace {
  std::vector<Coefficients> states;  // post burn-in
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;
};
ChainTrace run_chain(const ShapeModel& source, const ShapeModel& other,
                     const LikelihoodConfig& lik, const ProposalSpec& proposal,
                     const Coefficients& start, int n_samples, int burn_in,
                     std::uint64_t stream_seed);
}  // namespace detail

namespace reference {
// Serial ensemble, same stream derivation and merge order as the parallel
// version; kept as the comparison oracle for tests and benchmarks.
ChainResult run_ensemble(const ShapeModel& source, const ShapeModel& other,
                         const LikelihoodConfig& lik, const ChainConfig& cfg,
                         const ProposalSpec& proposal);
}  // namespace reference

}  // namespace ssms
