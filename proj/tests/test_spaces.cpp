#include <doctest.h>

#include <vector>

#include "helpers.hpp"
#include "ssms/datagen.hpp"
#include "ssms/metrics.hpp"
#include "ssms/spaces.hpp"

using namespace ssms;

namespace {

ChainConfig small_chains(int n_chains, int n_samples, int burn_in, int thin_to,
                         std::uint64_t seed) {
  ChainConfig cfg;
  cfg.n_chains = n_chains;
  cfg.n_samples = n_samples;
  cfg.burn_in = burn_in;
  cfg.thin_to = thin_to;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("intersection of the star pair recovers the shared arc") {
  auto stars = generate_star_models(star_row_spec(2));
  LikelihoodConfig lik{0.003, LikelihoodMode::Intersection};
  ChainConfig cfg;
  cfg.seed = 7;

  auto res = compute_intersection(stars.m1, stars.m2, lik, cfg,
                                  ProposalSpec::defaults(),
                                  FixedCount{stars.gt_intersection.q()});

  CHECK(res.model.q() == 2);
  CHECK(res.samples.size() == 5000);
  CHECK(res.provenance.size() == 5000);
  CHECK(res.acceptance_rates.size() == 15);
  CHECK(!res.degenerate);
  CHECK(!res.mean_gap_warning);
  CHECK(res.epsilon_estimate > 0.0);
  CHECK(res.epsilon_estimate < 0.1);
  CHECK(grassmann_distance(res.model, stars.gt_intersection) < 0.15);

  // posterior shapes hug both inputs
  CHECK(reconstruction_error(res.samples, stars.m1).mean < 0.05);
  CHECK(reconstruction_error(res.samples, stars.m2).mean < 0.05);
}

TEST_CASE("intersection sampling is deterministic") {
  auto stars = generate_star_models(star_row_spec(1));
  LikelihoodConfig lik{0.003, LikelihoodMode::Intersection};
  auto cfg = small_chains(4, 200, 50, 400, 3);

  auto a = compute_intersection(stars.m1, stars.m2, lik, cfg,
                                ProposalSpec::defaults(), FixedCount{2});
  auto b = compute_intersection(stars.m1, stars.m2, lik, cfg,
                                ProposalSpec::defaults(), FixedCount{2});
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i)
    CHECK(a.samples[i].data == b.samples[i].data);
  CHECK(a.model.basis == b.model.basis);
  CHECK(a.acceptance_rates == b.acceptance_rates);
}

TEST_CASE("both sides contribute, odd budgets favor the first") {
  auto stars = generate_star_models(star_row_spec(1));
  LikelihoodConfig lik{0.003, LikelihoodMode::Intersection};
  auto cfg = small_chains(3, 50, 10, 5, 13);

  auto res = compute_intersection(stars.m1, stars.m2, lik, cfg,
                                  ProposalSpec::defaults(), FixedCount{2});
  REQUIRE(res.samples.size() == 5);
  int from1 = 0, from2 = 0;
  for (auto p : res.provenance)
    (p == SampleSource::FromM1 ? from1 : from2)++;
  CHECK(from1 == 3);
  CHECK(from2 == 2);
  CHECK(res.acceptance_rates.size() == 3);
}

TEST_CASE("single chain runs entirely on the first side") {
  auto stars = generate_star_models(star_row_spec(1));
  LikelihoodConfig lik{0.003, LikelihoodMode::Intersection};
  auto cfg = small_chains(1, 60, 10, 20, 19);

  auto res = compute_intersection(stars.m1, stars.m2, lik, cfg,
                                  ProposalSpec::defaults(), FixedCount{2});
  CHECK(res.samples.size() == 20);
  for (auto p : res.provenance) CHECK(p == SampleSource::FromM1);
}

TEST_CASE("misaligned means raise the gap flag without failing") {
  auto stars = generate_star_models(star_row_spec(1));
  ShapeModel far = stars.m2;
  far.mean.data.array() += 100.0;
  LikelihoodConfig lik{0.003, LikelihoodMode::Intersection};
  auto cfg = small_chains(2, 60, 10, 20, 23);

  auto res = compute_intersection(stars.m1, far, lik, cfg,
                                  ProposalSpec::defaults(), FixedCount{2});
  CHECK(res.mean_gap_warning);

  // an explicit threshold overrides the automatic one
  auto relaxed = compute_intersection(stars.m1, far, lik, cfg,
                                      ProposalSpec::defaults(), FixedCount{2},
                                      1e6);
  CHECK(!relaxed.mean_gap_warning);
}

TEST_CASE("likelihood mode must match the operation") {
  auto stars = generate_star_models(star_row_spec(1));
  auto cfg = small_chains(2, 60, 10, 20, 29);
  LikelihoodConfig diff{0.003, LikelihoodMode::Difference};
  LikelihoodConfig inter{0.003, LikelihoodMode::Intersection};

  CHECK_THROWS_AS(compute_intersection(stars.m1, stars.m2, diff, cfg,
                                       ProposalSpec::defaults(), FixedCount{2}),
                  input_error);
  CHECK_THROWS_AS(compute_difference(stars.m1, stars.m2, inter, cfg,
                                     ProposalSpec::defaults()),
                  input_error);
}

TEST_CASE("difference samples come from the source and avoid the other") {
  auto stars = generate_star_models(star_row_spec(1));
  LikelihoodConfig lik{0.05, LikelihoodMode::Difference};
  auto cfg = small_chains(6, 500, 100, 600, 31);

  auto d12 = compute_difference(stars.m1, stars.m2, lik, cfg,
                                ProposalSpec::defaults());
  CHECK(d12.direction == DiffDirection::OneMinusTwo);
  CHECK(d12.samples.size() == 600);
  CHECK(reconstruction_error(d12.samples, stars.m1).mean < 1e-8);
  CHECK(d12.epsilon_estimate > 1e-3);

  auto d21 = compute_difference(stars.m1, stars.m2, lik, cfg,
                                ProposalSpec::defaults(),
                                DiffDirection::TwoMinusOne);
  CHECK(d21.direction == DiffDirection::TwoMinusOne);
  CHECK(reconstruction_error(d21.samples, stars.m2).mean < 1e-8);
}

TEST_CASE("collapsed acceptance is reported as degenerate") {
  auto stars = generate_star_models(star_row_spec(1));
  // a likelihood this sharp rejects essentially everything once the chain
  // reaches the numeric floor, so long runs drive the pooled rate under 1%
  LikelihoodConfig lik{1e-9, LikelihoodMode::Intersection};
  auto cfg = small_chains(2, 25000, 0, 100, 37);

  auto res = compute_intersection(stars.m1, stars.m2, lik, cfg,
                                  ProposalSpec::defaults(), FixedCount{2});
  CHECK(res.degenerate);
}

TEST_CASE("batch synthesis matches the serial reference") {
  auto m = test::make_random_model(2, 6, 3, 41);
  Rng rng(42);
  std::vector<Coefficients> alphas;
  for (int i = 0; i < 500; ++i)
    alphas.push_back(test::random_coefficients(3, rng));

  auto par = synthesize_all(m, alphas);
  auto ser = reference::synthesize_all(m, alphas);
  REQUIRE(par.size() == ser.size());
  for (size_t i = 0; i < par.size(); ++i)
    CHECK(par[i].data == ser[i].data);
}
