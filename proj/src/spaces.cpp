#include "ssms/spaces.hpp"

#include <cmath>

#include "ssms/likelihood.hpp"
#include "ssms/parallel.hpp"

namespace ssms {

namespace {

constexpr double kDegenerateAcceptance = 0.01;

double pooled_acceptance(const std::vector<double>& rates) {
  if (rates.empty()) return 0.0;
  double acc = 0.0;
  for (double r : rates) acc += r;
  return acc / static_cast<double>(rates.size());
}

template <bool Parallel>
std::vector<Shape> synthesize_all_impl(const ShapeModel& m,
                                       const std::vector<Coefficients>& alphas) {
  std::vector<Shape> out(alphas.size());
  const auto N = static_cast<std::int64_t>(alphas.size());
  if constexpr (Parallel) {
    SSMS_PRAGMA_OMP(parallel for schedule(static) num_threads(resolve_threads()))
    for (std::int64_t i = 0; i < N; ++i)
      out[static_cast<std::size_t>(i)] =
          synthesize(m, alphas[static_cast<std::size_t>(i)]);
  } else {
    for (std::int64_t i = 0; i < N; ++i)
      out[static_cast<std::size_t>(i)] =
          synthesize(m, alphas[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

std::vector<Shape> synthesize_all(const ShapeModel& m,
                                  const std::vector<Coefficients>& alphas) {
  return synthesize_all_impl<true>(m, alphas);
}

namespace reference {
std::vector<Shape> synthesize_all(const ShapeModel& m,
                                  const std::vector<Coefficients>& alphas) {
  return synthesize_all_impl<false>(m, alphas);
}
}  // namespace reference

IntersectionResult compute_intersection(const ShapeModel& m1,
                                        const ShapeModel& m2,
                                        const LikelihoodConfig& lik,
                                        const ChainConfig& chains,
                                        const ProposalSpec& proposal,
                                        const QPolicy& q_policy,
                                        double warn_mean_gap,
                                        const ChainProgress& progress) {
  require(m1.d() == m2.d() && m1.n() == m2.n(),
          "compute_intersection: dimension mismatch");
  require(lik.mode == LikelihoodMode::Intersection,
          "compute_intersection: config mode must be Intersection");

  if (std::isnan(warn_mean_gap))
    warn_mean_gap = std::sqrt(m1.eigenvalues[0]) + std::sqrt(m2.eigenvalues[0]);
  IntersectionResult res;
  res.mean_gap_warning = avg_distance(m1.mean, m2.mean) > warn_mean_gap;

  // Both sides of the union; odd budgets give the extra to the m1 side.
  ChainConfig side1 = chains, side2 = chains;
  side1.n_chains = (chains.n_chains + 1) / 2;
  side2.n_chains = chains.n_chains - side1.n_chains;
  side1.thin_to = (chains.thin_to + 1) / 2;
  side2.thin_to = chains.thin_to - side1.thin_to;
  if (side2.n_chains == 0) side1.thin_to = chains.thin_to;
  side2.seed = derive_seed(chains.seed, "side2");

  ChainResult r1 = run_ensemble(m1, m2, lik, side1, proposal, progress);
  std::vector<Shape> s1 = synthesize_all(m1, r1.retained);

  double eps_num = r1.mean_projection_distance * r1.retained.size();
  double eps_den = static_cast<double>(r1.retained.size());

  res.samples = std::move(s1);
  res.provenance.assign(res.samples.size(), SampleSource::FromM1);
  res.acceptance_rates = r1.acceptance_rate;
  res.start_separation_forced = r1.start_separation_forced;

  if (side2.n_chains > 0 && side2.thin_to > 0) {
    ChainProgress shifted;
    if (progress)
      shifted = [&](int chain, double rate) {
        progress(side1.n_chains + chain, rate);
      };
    ChainResult r2 = run_ensemble(m2, m1, lik, side2, proposal, shifted);
    std::vector<Shape> s2 = synthesize_all(m2, r2.retained);
    eps_num += r2.mean_projection_distance * r2.retained.size();
    eps_den += static_cast<double>(r2.retained.size());
    res.samples.insert(res.samples.end(), s2.begin(), s2.end());
    res.provenance.insert(res.provenance.end(), s2.size(), SampleSource::FromM2);
    res.acceptance_rates.insert(res.acceptance_rates.end(),
                                r2.acceptance_rate.begin(),
                                r2.acceptance_rate.end());
    res.start_separation_forced |= r2.start_separation_forced;
  }

  res.epsilon_estimate = eps_num / eps_den;
  res.degenerate = pooled_acceptance(res.acceptance_rates) < kDegenerateAcceptance;
  // Every sample is synthesized from one of the two bases, so the PCA can
  // run inside their joint span; at face scale that is the difference
  // between seconds and a dense eigensolve in the ambient dimension.
  Mat span(m1.basis.rows(), m1.basis.cols() + m2.basis.cols());
  span << m1.basis, m2.basis;
  res.model = build_pca_in_span(res.samples, span, q_policy);
  return res;
}

DifferenceResult compute_difference(const ShapeModel& m1, const ShapeModel& m2,
                                    const LikelihoodConfig& lik,
                                    const ChainConfig& chains,
                                    const ProposalSpec& proposal,
                                    DiffDirection direction,
                                    const ChainProgress& progress) {
  require(m1.d() == m2.d() && m1.n() == m2.n(),
          "compute_difference: dimension mismatch");
  require(lik.mode == LikelihoodMode::Difference,
          "compute_difference: config mode must be Difference");

  const ShapeModel& src = direction == DiffDirection::OneMinusTwo ? m1 : m2;
  const ShapeModel& sub = direction == DiffDirection::OneMinusTwo ? m2 : m1;

  ChainResult r = run_ensemble(src, sub, lik, chains, proposal, progress);
  DifferenceResult res;
  res.samples = synthesize_all(src, r.retained);
  res.direction = direction;
  res.epsilon_estimate = r.mean_projection_distance;
  res.acceptance_rates = r.acceptance_rate;
  res.degenerate = pooled_acceptance(r.acceptance_rate) < kDegenerateAcceptance;
  res.start_separation_forced = r.start_separation_forced;
  return res;
}

}  // namespace ssms
