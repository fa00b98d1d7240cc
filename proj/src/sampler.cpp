#include "ssms/sampler.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ssms/parallel.hpp"

namespace ssms {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void validate_proposal(const ProposalSpec& spec) {
  require(!spec.components.empty(), "proposal: no components");
  double wsum = 0.0;
  for (const auto& c : spec.components) {
    require(c.stddev > 0.0, "proposal: stddev must be > 0");
    require(c.weight > 0.0 && c.weight <= 1.0, "proposal: weight out of (0,1]");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw config_error("proposal: weights must sum to 1");
}

void validate_chain_config(const ChainConfig& cfg) {
  if (cfg.n_chains < 1) throw config_error("chains: n_chains must be >= 1");
  if (cfg.n_samples < 1) throw config_error("chains: n_samples must be >= 1");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_samples)
    throw config_error("chains: burn_in must be in [0, n_samples)");
  if (cfg.min_start_separation < 0.0)
    throw config_error("chains: min_start_separation must be >= 0");
  std::int64_t avail = static_cast<std::int64_t>(cfg.n_chains) *
                       (cfg.n_samples - cfg.burn_in);
  if (cfg.thin_to < 1 || cfg.thin_to > avail)
    throw config_error("chains: thin_to must be in [1, chains*(samples-burn_in)]");
}

Coefficients propose(const Coefficients& current, const ProposalSpec& spec,
                     Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  const ProposalComponent* pick = &spec.components.back();
  for (const auto& c : spec.components) {
    acc += c.weight;
    if (u <= acc) {
      pick = &c;
      break;
    }
  }
  if (pick->kind == ProposalKind::NormStep) {
    double norm = current.norm();
    if (norm > 0.0) {
      double s = rng.normal(norm, pick->stddev);
      return current * (s / norm);
    }
    // direction undefined at the origin, fall through to an isotropic step
  }
  Coefficients next = current;
  for (Eigen::Index i = 0; i < next.size(); ++i)
    next[i] += pick->stddev * rng.normal();
  return next;
}

std::pair<Coefficients, bool> mh_step(const Coefficients& current,
                                      const ShapeModel& source,
                                      const ShapeModel& other,
                                      const LikelihoodConfig& lik,
                                      const ProposalSpec& spec, Rng& rng,
                                      double& cached_log_post) {
  Coefficients cand = propose(current, spec, rng);
  double lp = log_likelihood(synthesize(source, cand), other, lik) +
              log_prior(cand);
  double log_t = lp - cached_log_post;
  bool accept;
  if (lp == kNegInf) {
    accept = false;  // zero-likelihood proposal, reject regardless of u
  } else if (cached_log_post == kNegInf || log_t >= 0.0) {
    accept = true;  // escaping a dead start, or t >= 1
  } else {
    accept = std::log(rng.uniform()) < log_t;
  }
  if (accept) {
    cached_log_post = lp;
    return {std::move(cand), true};
  }
  return {current, false};
}

std::vector<std::int64_t> thin_indices(std::int64_t total, std::int64_t keep) {
  require(keep >= 0 && keep <= total, "thin: keep out of range");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(keep));
  for (std::int64_t j = 0; j < keep; ++j) idx[j] = (j * total) / keep;
  return idx;
}

namespace detail {

std::vector<Coefficients> draw_starts(int n_chains, int q,
                                      double min_separation, Rng& rng,
                                      bool& forced) {
  std::vector<Coefficients> starts;
  starts.reserve(n_chains);
  forced = false;
  for (int c = 0; c < n_chains; ++c) {
    Coefficients s(q);
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      for (int i = 0; i < q; ++i) s[i] = rng.normal();
      ok = true;
      for (const auto& prev : starts)
        if ((s - prev).norm() < min_separation) {
          ok = false;
          break;
        }
    }
    if (!ok) forced = true;  // keep the last draw anyway
    starts.push_back(std::move(s));
  }
  return starts;
}

ChainTrace run_chain(const ShapeModel& source, const ShapeModel& other,
                     const LikelihoodConfig& lik, const ProposalSpec& proposal,
                     const Coefficients& start, int n_samples, int burn_in,
                     std::uint64_t stream_seed) {
  Rng rng(stream_seed);
  ChainTrace out;
  out.states.reserve(n_samples - burn_in);
  Coefficients state = start;
  double log_post =
      log_likelihood(synthesize(source, state), other, lik) + log_prior(state);
  for (int i = 0; i < n_samples; ++i) {
    auto [next, accepted] =
        mh_step(state, source, other, lik, proposal, rng, log_post);
    state = std::move(next);
    out.proposed++;
    out.accepted += accepted ? 1 : 0;
    if (i >= burn_in) out.states.push_back(state);
  }
  return out;
}

}  // namespace detail

namespace {

ChainResult assemble(const ShapeModel& source, const ShapeModel& other,
                     const LikelihoodConfig& lik, const ChainConfig& cfg,
                     std::vector<detail::ChainTrace> traces, bool forced) {
  ChainResult res;
  res.start_separation_forced = forced;
  res.acceptance_rate.reserve(cfg.n_chains);
  for (const auto& t : traces) {
    res.acceptance_rate.push_back(static_cast<double>(t.accepted) /
                                  static_cast<double>(t.proposed));
    res.accepted.push_back(t.accepted);
    res.proposed.push_back(t.proposed);
  }

  const std::int64_t per_chain = cfg.n_samples - cfg.burn_in;
  const std::int64_t total = per_chain * cfg.n_chains;
  auto idx = thin_indices(total, cfg.thin_to);
  res.retained.reserve(idx.size());
  for (auto i : idx) {
    const auto& trace = traces[static_cast<std::size_t>(i / per_chain)];
    res.retained.push_back(trace.states[static_cast<std::size_t>(i % per_chain)]);
  }

  // Empirical epsilon: mean distance between retained shapes and their
  // projections onto the other model.
  double acc = 0.0;
  for (const auto& alpha : res.retained) {
    Shape x = synthesize(source, alpha);
    Shape xp = synthesize(other, project(other, x));
    acc += avg_distance(x, xp);
  }
  res.mean_projection_distance = acc / static_cast<double>(res.retained.size());
  return res;
}

template <bool Parallel>
ChainResult run_ensemble_impl(const ShapeModel& source, const ShapeModel& other,
                              const LikelihoodConfig& lik,
                              const ChainConfig& cfg,
                              const ProposalSpec& proposal,
                              const ChainProgress& progress) {
  validate_proposal(proposal);
  validate_chain_config(cfg);
  require(source.d() == other.d() && source.n() == other.n(),
          "run_ensemble: model dimension mismatch");

  Rng start_rng(derive_seed(cfg.seed, "starts"));
  bool forced = false;
  auto starts = detail::draw_starts(cfg.n_chains, source.q(),
                                    cfg.min_start_separation, start_rng, forced);

  auto one_chain = [&](int c) {
    auto trace = detail::run_chain(source, other, lik, proposal, starts[c],
                                   cfg.n_samples, cfg.burn_in,
                                   derive_seed(cfg.seed, "chain", c));
    if (progress) {
      double rate = static_cast<double>(trace.accepted) /
                    static_cast<double>(trace.proposed);
      SSMS_PRAGMA_OMP(critical(ssms_progress))
      progress(c, rate);
    }
    return trace;
  };

  std::vector<detail::ChainTrace> traces(cfg.n_chains);
  if constexpr (Parallel) {
    SSMS_PRAGMA_OMP(parallel for schedule(dynamic) num_threads(resolve_threads()))
    for (int c = 0; c < cfg.n_chains; ++c) traces[c] = one_chain(c);
  } else {
    for (int c = 0; c < cfg.n_chains; ++c) traces[c] = one_chain(c);
  }
  return assemble(source, other, lik, cfg, std::move(traces), forced);
}

}  // namespace

ChainResult run_ensemble(const ShapeModel& source, const ShapeModel& other,
                         const LikelihoodConfig& lik, const ChainConfig& cfg,
                         const ProposalSpec& proposal,
                         const ChainProgress& progress) {
  return run_ensemble_impl<true>(source, other, lik, cfg, proposal, progress);
}

namespace reference {
ChainResult run_ensemble(const ShapeModel& source, const ShapeModel& other,
                         const LikelihoodConfig& lik, const ChainConfig& cfg,
                         const ProposalSpec& proposal) {
  return run_ensemble_impl<false>(source, other, lik, cfg, proposal, {});
}
}  // namespace reference

}  // namespace ssms
