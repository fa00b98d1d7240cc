#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "helpers.hpp"
#include "ssms/datagen.hpp"
#include "ssms/likelihood.hpp"
#include "ssms/metrics.hpp"

using namespace ssms;

namespace {

double point0_angle_deg(const Shape& s) {
  return std::atan2(s.data[1], s.data[0]) * 180.0 / std::numbers::pi;
}

std::vector<Shape> draw_from(const ShapeModel& m, int count,
                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Shape> out;
  for (int i = 0; i < count; ++i)
    out.push_back(synthesize(m, test::random_coefficients(m.q(), rng)));
  return out;
}

}  // namespace

TEST_CASE("star vertices sit on the circle at the requested angles") {
  StarSpec spec;
  spec.r = 2.0;
  Shape s = star_shape(spec, {0.0, 90.0, 180.0, 270.0, 45.0});
  CHECK(s.d == 2);
  CHECK(s.n == 5);
  CHECK(s.data[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.data[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s.data[3] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.data[4] == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(s.data[8] == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  CHECK(s.data[9] == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
}

TEST_CASE("row presets carry the benchmark interval widths") {
  auto r1 = star_row_spec(1);
  CHECK(r1.a == 5);
  CHECK(r1.b == 40);
  CHECK(r1.c == 20);
  auto r6 = star_row_spec(6);
  CHECK(r6.a == 40);
  CHECK(r6.b == 80);
  CHECK(r6.c == 50);
  CHECK_THROWS_AS(star_row_spec(0), input_error);
  CHECK_THROWS_AS(star_row_spec(7), input_error);
}

TEST_CASE("star family has the advertised ranks") {
  auto stars = generate_star_models(star_row_spec(2));
  // two free points, two in-plane directions each; the overlap frees one
  CHECK(stars.m1.q() == 4);
  CHECK(stars.m2.q() == 4);
  CHECK(stars.gt_intersection.q() == 2);
  validate_model(stars.m1);
  validate_model(stars.m2);
  validate_model(stars.gt_intersection);
}

TEST_CASE("ground-truth intersection is contained in both models") {
  auto stars = generate_star_models(star_row_spec(1));
  auto probes = draw_from(stars.gt_intersection, 50, 71);
  CHECK(reconstruction_error(probes, stars.m1).mean < 1e-8);
  CHECK(reconstruction_error(probes, stars.m2).mean < 1e-8);
}

TEST_CASE("difference samples avoid the intersection but stay in their model") {
  auto stars = generate_star_models(star_row_spec(1));
  REQUIRE(!stars.gt_diff12.empty());
  REQUIRE(!stars.gt_diff21.empty());

  CHECK(reconstruction_error(stars.gt_diff12, stars.m1).mean < 1e-8);
  CHECK(reconstruction_error(stars.gt_diff21, stars.m2).mean < 1e-8);

  for (const auto& s : stars.gt_diff12) {
    Coefficients a = project(stars.gt_intersection, s);
    double err = avg_distance(s, synthesize(stars.gt_intersection, a));
    CHECK(err > 1e-4);
  }

  // point-0 angles live strictly in the one-sided bands
  for (const auto& s : stars.gt_diff12) {
    double ang = point0_angle_deg(s);
    CHECK(ang > 95.0);
    CHECK(ang <= 130.0 + 1e-9);
  }
  for (const auto& s : stars.gt_diff21) {
    double ang = point0_angle_deg(s);
    CHECK(ang < 85.0);
    CHECK(ang >= 70.0 - 1e-9);
  }
}

TEST_CASE("intersection model is centered on the shared arc") {
  auto stars = generate_star_models(star_row_spec(2));
  double ang = point0_angle_deg(stars.gt_intersection.mean);
  CHECK(ang == doctest::Approx(90.0).epsilon(1e-9));
}

TEST_CASE("grid generation is deterministic, random mode needs its seed") {
  auto spec = star_row_spec(3);
  auto a = generate_star_models(spec);
  auto b = generate_star_models(spec);
  CHECK(a.m1.basis == b.m1.basis);
  CHECK(a.m1.mean.data == b.m1.mean.data);
  CHECK(a.gt_diff12.size() == b.gt_diff12.size());

  spec.sampling = StarSampling::UniformRandom;
  spec.seed = 5;
  auto c = generate_star_models(spec);
  auto d = generate_star_models(spec);
  CHECK(c.m1.mean.data == d.m1.mean.data);
  CHECK(c.gt_diff12.size() == static_cast<std::size_t>(spec.n_train));

  spec.seed = 6;
  auto e = generate_star_models(spec);
  CHECK(c.m1.mean.data != e.m1.mean.data);
}

TEST_CASE("star spec validation") {
  StarSpec spec;
  spec.a = 30;
  spec.b = 20;  // difference band would be empty
  CHECK_THROWS_AS(generate_star_models(spec), input_error);
  spec = {};
  spec.r = 0.0;
  CHECK_THROWS_AS(generate_star_models(spec), input_error);
  spec = {};
  spec.n_train = 1;
  CHECK_THROWS_AS(generate_star_models(spec), input_error);
}

TEST_CASE("split pair shares exactly the planted directions") {
  SplitSpec spec;
  spec.ambient_dim = 60;
  spec.q1_unique = 3;
  spec.q2_unique = 4;
  spec.q_shared = 2;
  spec.seed = 11;
  auto split = generate_split_models(spec);

  CHECK(split.m1.q() == 5);
  CHECK(split.m2.q() == 6);
  CHECK(split.gt_intersection.q() == 2);
  validate_model(split.m1);
  validate_model(split.m2);

  // same mean everywhere, with the requested magnitude
  CHECK(split.m1.mean.data == split.m2.mean.data);
  CHECK(split.m1.mean.data == split.gt_intersection.mean.data);
  CHECK(split.m1.mean.data.norm() ==
        doctest::Approx(spec.mean_norm).epsilon(0.3));

  auto normalized = [](const ShapeModel& m) {
    Mat B(m.basis.rows(), m.q());
    for (int i = 0; i < m.q(); ++i)
      B.col(i) = m.basis.col(i) / std::sqrt(m.eigenvalues[i]);
    return B;
  };
  Mat B1 = normalized(split.m1), B2 = normalized(split.m2);
  CHECK((B1.transpose() * B1 - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() <
        1e-10);

  // the shared count shows up as unit singular values of the cross overlap
  Eigen::JacobiSVD<Mat> svd(B1.transpose() * B2);
  int unit = 0, zero = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > 1.0 - 1e-10) ++unit;
    if (svd.singularValues()[i] < 1e-10) ++zero;
  }
  CHECK(unit == 2);
  CHECK(zero == 3);

  // intersection lives inside both spans
  Mat BI = normalized(split.gt_intersection);
  for (int i = 0; i < 2; ++i) {
    Vec u = BI.col(i);
    CHECK((u - B1 * (B1.transpose() * u)).norm() < 1e-10);
    CHECK((u - B2 * (B2.transpose() * u)).norm() < 1e-10);
  }
}

TEST_CASE("eigenvalue pool is distributed over the partition") {
  SplitSpec spec;
  spec.ambient_dim = 30;
  spec.q1_unique = 2;
  spec.q2_unique = 2;
  spec.q_shared = 1;
  spec.seed = 13;
  spec.eigenvalue_pool = {70, 60, 50, 40, 30};
  auto split = generate_split_models(spec);

  auto contains = [&](double v) {
    return std::count(spec.eigenvalue_pool.begin(), spec.eigenvalue_pool.end(),
                      v) > 0;
  };
  for (int i = 0; i < split.m1.q(); ++i) CHECK(contains(split.m1.eigenvalues[i]));
  for (int i = 0; i < split.m2.q(); ++i) CHECK(contains(split.m2.eigenvalues[i]));

  // every pool value used once; the shared one is counted in both models
  double total = split.m1.eigenvalues.sum() + split.m2.eigenvalues.sum() -
                 split.gt_intersection.eigenvalues.sum();
  CHECK(total == doctest::Approx(70 + 60 + 50 + 40 + 30).epsilon(1e-12));

  spec.eigenvalue_pool = {1, 2};
  CHECK_THROWS_AS(generate_split_models(spec), input_error);
}

TEST_CASE("split defaults to a flat unit spectrum") {
  SplitSpec spec;
  spec.ambient_dim = 30;
  spec.q1_unique = 2;
  spec.q2_unique = 2;
  spec.q_shared = 2;
  auto split = generate_split_models(spec);
  for (int i = 0; i < split.m1.q(); ++i)
    CHECK(split.m1.eigenvalues[i] == 1.0);
}

TEST_CASE("empty shared subset leaves a mean-only intersection") {
  SplitSpec spec;
  spec.ambient_dim = 30;
  spec.q1_unique = 3;
  spec.q2_unique = 3;
  spec.q_shared = 0;
  auto split = generate_split_models(spec);
  CHECK(split.gt_intersection.q() == 0);
  CHECK(split.m1.q() == 3);
}

TEST_CASE("split spec validation") {
  SplitSpec spec;
  spec.ambient_dim = 31;  // not a 3d vertex layout
  CHECK_THROWS_AS(generate_split_models(spec), input_error);
  spec = {};
  spec.ambient_dim = 6;
  spec.q1_unique = 4;
  spec.q2_unique = 4;
  spec.q_shared = 0;
  CHECK_THROWS_AS(generate_split_models(spec), input_error);
}

TEST_CASE("harmonic spectrum") {
  auto h = harmonic_eigenvalues(4, 100.0);
  CHECK(h == std::vector<double>{100.0, 50.0, 100.0 / 3.0, 25.0});
  CHECK_THROWS_AS(harmonic_eigenvalues(0, 1.0), input_error);
}
