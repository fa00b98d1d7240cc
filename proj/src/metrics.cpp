#include "ssms/metrics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssms/likelihood.hpp"
#include "ssms/parallel.hpp"
#include "ssms/rng.hpp"

namespace ssms {

AffineSubspace to_affine_subspace(const ShapeModel& m) {
  AffineSubspace s;
  s.displacement = m.mean.data;
  s.basis.resize(m.basis.rows(), m.basis.cols());
  for (int i = 0; i < m.q(); ++i)
    s.basis.col(i) = m.basis.col(i) / std::sqrt(m.eigenvalues[i]);
  return s;
}

namespace {

// Stiefel lift: append the normalized out-of-span part of the displacement
// as an extra homogeneous coordinate. b0 = 0 when the displacement lies in
// the span, which keeps the last column well defined.
Mat stiefel_coords(const AffineSubspace& s) {
  Vec b = s.displacement - s.basis * (s.basis.transpose() * s.displacement);
  double nb = b.norm();
  Vec b0 = nb < 1e-10 ? Vec::Zero(s.displacement.size()) : Vec(b / nb);
  double scale = std::sqrt(1.0 + b0.squaredNorm());
  Mat Y(s.basis.rows() + 1, s.basis.cols() + 1);
  Y.setZero();
  Y.topLeftCorner(s.basis.rows(), s.basis.cols()) = s.basis;
  Y.topRightCorner(s.basis.rows(), 1) = b0 / scale;
  Y(s.basis.rows(), s.basis.cols()) = 1.0 / scale;
  return Y;
}

}  // namespace

double grassmann_distance(const AffineSubspace& s1, const AffineSubspace& s2) {
  require(s1.basis.rows() == s2.basis.rows(),
          "grassmann_distance: ambient dimension mismatch");
  if (s1.basis.cols() != s2.basis.cols())
    throw input_error(
        "grassmann_distance: subspace dimensions differ; truncate to the "
        "smaller k first");
  if ((s1.basis.array() == s2.basis.array()).all() &&
      (s1.displacement.array() == s2.displacement.array()).all())
    return 0.0;

  Mat Y1 = stiefel_coords(s1), Y2 = stiefel_coords(s2);
  Mat C = Y1.transpose() * Y2;
  Eigen::JacobiSVD<Mat> svd_cos(C);
  Vec cosv = svd_cos.singularValues();
  // acos loses half the significant digits near 1, so angles below pi/4 are
  // recomputed from the sine form, which is accurate there. Cosines sort
  // descending (angles ascending), sines descending (angles descending);
  // index from opposite ends to pair them.
  Eigen::JacobiSVD<Mat> svd_sin(Y2 - Y1 * C);
  Vec sinv = svd_sin.singularValues();
  const Eigen::Index k = cosv.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    double c = std::clamp(cosv[i], -1.0, 1.0);
    double th = c > std::numbers::sqrt2 / 2
                    ? std::asin(std::clamp(sinv[k - 1 - i], 0.0, 1.0))
                    : std::acos(c);
    acc += th * th;
  }
  return std::sqrt(acc);
}

namespace {

template <bool Parallel>
ReconError recon_impl(const std::vector<Shape>& samples,
                      const ShapeModel& reference) {
  require(!samples.empty(), "reconstruction_error: no samples");
  const auto N = static_cast<std::int64_t>(samples.size());
  std::vector<double> errs(samples.size());
  if constexpr (Parallel) {
    SSMS_PRAGMA_OMP(parallel for schedule(static) num_threads(resolve_threads()))
    for (std::int64_t i = 0; i < N; ++i) {
      const Shape& x = samples[static_cast<std::size_t>(i)];
      errs[static_cast<std::size_t>(i)] =
          avg_distance(synthesize(reference, project(reference, x)), x);
    }
  } else {
    for (std::int64_t i = 0; i < N; ++i) {
      const Shape& x = samples[static_cast<std::size_t>(i)];
      errs[static_cast<std::size_t>(i)] =
          avg_distance(synthesize(reference, project(reference, x)), x);
    }
  }
  double mean = 0.0;
  for (double e : errs) mean += e;
  mean /= static_cast<double>(N);
  double var = 0.0;
  for (double e : errs) var += (e - mean) * (e - mean);
  var /= static_cast<double>(N);
  return {mean, std::sqrt(var)};
}

}  // namespace

ReconError reconstruction_error(const std::vector<Shape>& samples,
                                const ShapeModel& reference) {
  return recon_impl<true>(samples, reference);
}

namespace reference {
ReconError reconstruction_error(const std::vector<Shape>& samples,
                                const ShapeModel& ref) {
  return recon_impl<false>(samples, ref);
}
}  // namespace reference

ShapeModel union_model(const ShapeModel& m1, const ShapeModel& m2,
                       int n_samples, const QPolicy& policy,
                       std::uint64_t seed) {
  require(m1.d() == m2.d() && m1.n() == m2.n(),
          "union_model: dimension mismatch");
  require(n_samples >= 4, "union_model: need at least 4 samples");
  std::vector<Shape> pool;
  pool.reserve(n_samples);
  Rng rng(derive_seed(seed, "union"));
  for (int i = 0; i < n_samples; ++i) {
    const ShapeModel& m = (i < n_samples / 2) ? m1 : m2;
    Coefficients a(m.q());
    for (int j = 0; j < m.q(); ++j) a[j] = rng.normal();
    pool.push_back(synthesize(m, a));
  }
  Mat span(m1.basis.rows(), m1.basis.cols() + m2.basis.cols());
  span << m1.basis, m2.basis;
  return build_pca_in_span(pool, span, policy);
}

}  // namespace ssms
