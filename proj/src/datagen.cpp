#include "ssms/datagen.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssms/rng.hpp"

namespace ssms {

namespace {

constexpr double kEndpointMargin = 1e-6;  // degrees, keeps open ends open

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Per-axis sample positions over [lo, hi]. Grid mode uses an even lattice
// whose size is the per-axis root of n_train.
std::vector<double> axis_positions(double lo, double hi, int count) {
  std::vector<double> xs(count);
  if (count == 1) {
    xs[0] = 0.5 * (lo + hi);
    return xs;
  }
  double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) xs[i] = lo + step * i;
  return xs;
}

int grid_side(int n_train, int k) {
  int side = static_cast<int>(std::llround(std::pow(n_train, 1.0 / k)));
  return std::max(side, 2);
}

// All stars with the listed points displaced over the box given by the
// per-point [lo, hi] ranges; the other points stay at base angles.
std::vector<Shape> star_box(const StarSpec& spec,
                            const std::vector<int>& varied,
                            const std::vector<std::pair<double, double>>& range,
                            Rng* rng) {
  const int k = static_cast<int>(varied.size());
  std::vector<Shape> out;
  if (rng != nullptr) {
    out.reserve(spec.n_train);
    for (int s = 0; s < spec.n_train; ++s) {
      std::array<double, 5> ang = spec.base_angles;
      for (int j = 0; j < k; ++j) {
        auto [lo, hi] = range[j];
        ang[varied[j]] += lo + (hi - lo) * rng->uniform();
      }
      out.push_back(star_shape(spec, ang));
    }
    return out;
  }
  int side = grid_side(spec.n_train, k);
  std::vector<std::vector<double>> axes;
  for (auto [lo, hi] : range) axes.push_back(axis_positions(lo, hi, side));
  std::vector<int> idx(k, 0);
  out.reserve(static_cast<std::size_t>(std::pow(side, k)));
  for (;;) {
    std::array<double, 5> ang = spec.base_angles;
    for (int j = 0; j < k; ++j) ang[varied[j]] += axes[j][idx[j]];
    out.push_back(star_shape(spec, ang));
    int j = k - 1;
    while (j >= 0 && ++idx[j] == side) idx[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

}  // namespace

StarSpec star_row_spec(int row) {
  StarSpec spec;
  switch (row) {
    case 1: spec.a = 5;  spec.b = 40; spec.c = 20; break;
    case 2: spec.a = 5;  spec.b = 20; spec.c = 20; break;
    case 3: spec.a = 10; spec.b = 40; spec.c = 20; break;
    case 4: spec.a = 10; spec.b = 20; spec.c = 20; break;
    case 5: spec.a = 20; spec.b = 60; spec.c = 30; break;
    case 6: spec.a = 40; spec.b = 80; spec.c = 50; break;
    default: throw input_error("star_row_spec: row must be 1..6");
  }
  return spec;
}

Shape star_shape(const StarSpec& spec, const std::array<double, 5>& angles) {
  Vec data(10);
  for (int i = 0; i < 5; ++i) {
    double th = deg2rad(angles[i]);
    data[2 * i] = spec.r * std::cos(th);
    data[2 * i + 1] = spec.r * std::sin(th);
  }
  return Shape(std::move(data), 2, 5);
}

StarModels generate_star_models(const StarSpec& spec) {
  require(spec.a > 0 && spec.b > 0 && spec.c > 0,
          "star: a, b, c must be > 0");
  require(spec.a < spec.b && spec.a < spec.c,
          "star: need a < b and a < c for non-empty differences");
  require(spec.n_train >= 2, "star: n_train must be >= 2");
  require(spec.r > 0, "star: r must be > 0");

  Rng grid_rng(derive_seed(spec.seed, "train"));
  Rng* rngp = spec.sampling == StarSampling::UniformRandom ? &grid_rng : nullptr;

  StarModels out;
  out.m1 = build_pca(
      star_box(spec, {0, 2}, {{-spec.a, spec.b}, {-spec.a, spec.b}}, rngp),
      spec.q_policy);
  out.m2 = build_pca(
      star_box(spec, {0, 3}, {{-spec.c, spec.a}, {-spec.c, spec.a}}, rngp),
      spec.q_policy);
  out.gt_intersection = build_pca(
      star_box(spec, {0}, {{-spec.a, spec.a}}, rngp), spec.q_policy);

  // Difference sample boxes; the ends shared with the intersection are open.
  Rng diff_rng(derive_seed(spec.seed, "diff"));
  Rng* diff_p =
      spec.sampling == StarSampling::UniformRandom ? &diff_rng : nullptr;
  out.gt_diff12 = star_box(
      spec, {0, 2},
      {{spec.a + kEndpointMargin, spec.b}, {-spec.a, spec.b}}, diff_p);
  out.gt_diff21 = star_box(
      spec, {0, 3},
      {{-spec.c, -spec.a - kEndpointMargin}, {-spec.c, spec.a}}, diff_p);
  return out;
}

std::vector<double> harmonic_eigenvalues(int count, double scale) {
  require(count >= 1 && scale > 0, "harmonic_eigenvalues: bad arguments");
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) out[j] = scale / (j + 1);
  return out;
}

namespace {

ShapeModel assemble_split(const Vec& mean, const Mat& pool,
                          const std::vector<double>& lambdas,
                          const std::vector<int>& cols, int d, int n) {
  std::vector<int> order = cols;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return lambdas[a] > lambdas[b];
  });
  ShapeModel m;
  m.mean = Shape(mean, d, n);
  m.basis.resize(pool.rows(), static_cast<Eigen::Index>(order.size()));
  m.eigenvalues.resize(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    m.eigenvalues[static_cast<Eigen::Index>(i)] = lambdas[order[i]];
    m.basis.col(static_cast<Eigen::Index>(i)) =
        pool.col(order[i]) * std::sqrt(lambdas[order[i]]);
  }
  return m;
}

}  // namespace

SplitModels generate_split_models(const SplitSpec& spec) {
  const int q = spec.q1_unique + spec.q2_unique + spec.q_shared;
  require(spec.q1_unique >= 0 && spec.q2_unique >= 0 && spec.q_shared >= 0,
          "split: negative subset size");
  require(q >= 1, "split: no basis vectors at all");
  require(q <= spec.ambient_dim, "split: q1 + q2 + qI exceeds ambient dim");
  require(spec.ambient_dim % 3 == 0,
          "split: ambient dim must be divisible by 3 (d=3 layout)");
  if (!spec.eigenvalue_pool.empty())
    require(static_cast<int>(spec.eigenvalue_pool.size()) == q,
            "split: eigenvalue pool size != q1 + q2 + qI");

  const int N = spec.ambient_dim;
  const int d = 3, n = N / 3;
  Rng rng(derive_seed(spec.seed, "split"));

  Mat G(N, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < N; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(N, q);

  std::vector<double> lambdas =
      spec.eigenvalue_pool.empty() ? std::vector<double>(q, 1.0)
                                   : spec.eigenvalue_pool;

  // Random split: shuffle column indices, then cut into the three subsets.
  std::vector<int> perm(q);
  for (int i = 0; i < q; ++i) perm[i] = i;
  for (int i = q - 1; i > 0; --i) {
    int j = static_cast<int>(rng.uniform() * (i + 1));
    if (j > i) j = i;
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> s1(perm.begin(), perm.begin() + spec.q1_unique);
  std::vector<int> s2(perm.begin() + spec.q1_unique,
                      perm.begin() + spec.q1_unique + spec.q2_unique);
  std::vector<int> sI(perm.begin() + spec.q1_unique + spec.q2_unique,
                      perm.end());

  Vec mean(N);
  double entry_std = spec.mean_norm / std::sqrt(static_cast<double>(N));
  for (int i = 0; i < N; ++i) mean[i] = entry_std * rng.normal();

  std::vector<int> u1 = s1;
  u1.insert(u1.end(), sI.begin(), sI.end());
  std::vector<int> u2 = s2;
  u2.insert(u2.end(), sI.begin(), sI.end());

  SplitModels out;
  out.m1 = assemble_split(mean, Q, lambdas, u1, d, n);
  out.m2 = assemble_split(mean, Q, lambdas, u2, d, n);
  // q_shared = 0 leaves a zero-dimensional intersection: mean only.
  out.gt_intersection = assemble_split(mean, Q, lambdas, sI, d, n);
  return out;
}

}  // namespace ssms
