#include "ssms/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ssms {

void validate_model(const ShapeModel& m, double tol) {
  require(m.basis.rows() == m.mean.dim(), "model: basis rows != d*n");
  require(m.basis.cols() == m.eigenvalues.size(),
          "model: basis cols != eigenvalue count");
  require(m.q() <= m.mean.dim(), "model: q > d*n");
  for (int i = 0; i < m.q(); ++i) {
    require(m.eigenvalues[i] > 0.0, "model: eigenvalue <= 0");
    if (i > 0)
      require(m.eigenvalues[i] <= m.eigenvalues[i - 1] * (1.0 + tol),
              "model: eigenvalues not descending");
    double nrm2 = m.basis.col(i).squaredNorm();
    require(std::abs(nrm2 - m.eigenvalues[i]) <=
                tol * std::max(1.0, m.eigenvalues[i]),
            "model: column squared norm != eigenvalue");
  }
}

Shape synthesize(const ShapeModel& m, const Coefficients& alpha) {
  require(alpha.size() == m.q(), "synthesize: coefficient length != q");
  return Shape(m.mean.data + m.basis * alpha, m.d(), m.n());
}

Coefficients project(const ShapeModel& m, const Shape& x) {
  require(x.dim() == m.mean.dim(), "project: dimension mismatch");
  // basis.col(i) = sqrt(l_i) u_i, so u_i . r / sqrt(l_i) = col_i . r / l_i
  Vec r = x.data - m.mean.data;
  return (m.basis.transpose() * r).array() / m.eigenvalues.array();
}

namespace {

int resolve_q(const Vec& lambda, const QPolicy& policy) {
  int avail = static_cast<int>(lambda.size());
  if (const auto* fc = std::get_if<FixedCount>(&policy)) {
    require(fc->q >= 1, "q_policy: fixed count must be >= 1");
    return std::min(fc->q, avail);
  }
  const auto& vf = std::get<VarianceFraction>(policy);
  require(vf.fraction > 0.0 && vf.fraction <= 1.0,
          "q_policy: fraction must be in (0, 1]");
  double total = lambda.sum();
  double acc = 0.0;
  for (int i = 0; i < avail; ++i) {
    acc += lambda[i];
    if (acc >= vf.fraction * total) return i + 1;
  }
  return avail;
}

Vec sample_mean(const std::vector<Shape>& samples) {
  Vec mean = Vec::Zero(samples[0].dim());
  for (const auto& s : samples) mean += s.data;
  return mean / static_cast<double>(samples.size());
}

void check_uniform(const std::vector<Shape>& samples, const char* who) {
  require(samples.size() >= 2, std::string(who) + ": need at least 2 samples");
  const int d = samples[0].d, n = samples[0].n;
  for (const auto& s : samples)
    require(s.d == d && s.n == n,
            std::string(who) + ": mixed shape dimensions");
}

// Shared tail of the PCA builders: drop components below 1e-12 * lambda_1,
// resolve the retained count, scale columns to sqrt(lambda).
ShapeModel assemble_pca(const Vec& mean, int d, int n, const Vec& lambda,
                        const Mat& U, const QPolicy& policy) {
  int rank = 0;
  double floor = 1e-12 * std::max(lambda[0], 0.0);
  while (rank < lambda.size() && lambda[rank] > floor && lambda[rank] > 0.0)
    ++rank;
  if (rank == 0) throw input_error("build_pca: rank 0 after thresholding");

  int q = std::min(resolve_q(lambda.head(rank), policy), rank);
  ShapeModel m;
  m.mean = Shape(mean, d, n);
  m.eigenvalues = lambda.head(q);
  m.basis.resize(mean.size(), q);
  for (int i = 0; i < q; ++i)
    m.basis.col(i) = U.col(i) * std::sqrt(lambda[i]);
  return m;
}

}  // namespace

ShapeModel build_pca(const std::vector<Shape>& samples, const QPolicy& policy) {
  check_uniform(samples, "build_pca");
  const int d = samples[0].d, n = samples[0].n;
  const Eigen::Index dn = samples[0].dim();
  const Eigen::Index N = static_cast<Eigen::Index>(samples.size());

  Vec mean = sample_mean(samples);
  Mat X(dn, N);
  for (Eigen::Index j = 0; j < N; ++j) X.col(j) = samples[j].data - mean;

  // Covariance route when the ambient dimension is small, Gram route when
  // the sample count is the smaller side (faces: dn ~ 1.7e4, N ~ 5e3).
  Vec lambda;
  Mat U;
  if (dn <= N) {
    Mat C = (X * X.transpose()) / static_cast<double>(N - 1);
    Eigen::SelfAdjointEigenSolver<Mat> eig(C);
    lambda = eig.eigenvalues().reverse();
    U = eig.eigenvectors().rowwise().reverse();
  } else {
    Mat G = (X.transpose() * X) / static_cast<double>(N - 1);
    Eigen::SelfAdjointEigenSolver<Mat> eig(G);
    lambda = eig.eigenvalues().reverse();
    Mat W = eig.eigenvectors().rowwise().reverse();
    U.resize(dn, N);
    for (Eigen::Index j = 0; j < N; ++j) {
      double l = lambda[j];
      if (l > 0.0)
        U.col(j) = X * W.col(j) / std::sqrt(l * static_cast<double>(N - 1));
      else
        U.col(j).setZero();
    }
  }

  return assemble_pca(mean, d, n, lambda, U, policy);
}

ShapeModel build_pca_in_span(const std::vector<Shape>& samples,
                             const Mat& directions, const QPolicy& policy) {
  check_uniform(samples, "build_pca_in_span");
  const int d = samples[0].d, n = samples[0].n;
  const Eigen::Index dn = samples[0].dim();
  const Eigen::Index N = static_cast<Eigen::Index>(samples.size());
  require(directions.rows() == dn, "build_pca_in_span: direction rows != d*n");
  require(directions.cols() >= 1, "build_pca_in_span: no directions");

  const Eigen::Index s = std::min(directions.cols(), dn);
  Eigen::HouseholderQR<Mat> qr(directions);
  Mat Q = qr.householderQ() * Mat::Identity(dn, s);

  Vec mean = sample_mean(samples);
  Mat C(s, N);
  for (Eigen::Index j = 0; j < N; ++j)
    C.col(j) = Q.transpose() * (samples[j].data - mean);

  Mat S = (C * C.transpose()) / static_cast<double>(N - 1);
  Eigen::SelfAdjointEigenSolver<Mat> eig(S);
  Vec lambda = eig.eigenvalues().reverse();
  Mat U = Q * eig.eigenvectors().rowwise().reverse();
  return assemble_pca(mean, d, n, lambda, U, policy);
}

ShapeModel align_procrustes(const ShapeModel& moving, const ShapeModel& fixed) {
  require(moving.d() == fixed.d() && moving.n() == fixed.n(),
          "align_procrustes: dimension mismatch");
  const int d = moving.d(), n = moving.n();

  Eigen::Map<const Mat> P(moving.mean.data.data(), d, n);
  Eigen::Map<const Mat> Q(fixed.mean.data.data(), d, n);
  Vec pc = P.rowwise().mean(), qc = Q.rowwise().mean();
  Mat Pc = P.colwise() - pc, Qc = Q.colwise() - qc;

  double pnorm2 = Pc.squaredNorm();
  require(pnorm2 > 0.0, "align_procrustes: degenerate mean (coincident points)");

  // Orthogonal Procrustes with similarity scaling: R from the SVD of the
  // cross covariance, s = trace(D S) / ||Pc||^2 with S flipping the last
  // singular value when det < 0 keeps R a proper rotation.
  Mat M = Qc * Pc.transpose();
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec ones = Vec::Ones(d);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
    ones[d - 1] = -1.0;
  Mat R = svd.matrixU() * ones.asDiagonal() * svd.matrixV().transpose();
  double s = (svd.singularValues().array() * ones.array()).sum() / pnorm2;
  Vec t = qc - s * R * pc;

  ShapeModel out;
  Mat newMean = (s * R * P).colwise() + t;
  out.mean = Shape(Eigen::Map<Vec>(newMean.data(), moving.mean.dim()), d, n);
  out.basis.resize(moving.basis.rows(), moving.basis.cols());
  for (int c = 0; c < moving.q(); ++c) {
    Eigen::Map<const Mat> B(moving.basis.col(c).data(), d, n);
    Mat rb = s * R * B;
    out.basis.col(c) = Eigen::Map<Vec>(rb.data(), moving.basis.rows());
  }
  out.eigenvalues = moving.eigenvalues * (s * s);
  return out;
}

ShapeModel truncate(const ShapeModel& m, int q_new) {
  require(q_new >= 1 && q_new <= m.q(), "truncate: q_new out of range");
  ShapeModel out;
  out.mean = m.mean;
  out.basis = m.basis.leftCols(q_new);
  out.eigenvalues = m.eigenvalues.head(q_new);
  return out;
}

PerVertexVariance per_vertex_variance(const std::vector<Shape>& samples) {
  require(samples.size() >= 2, "per_vertex_variance: need at least 2 samples");
  const int d = samples[0].d, n = samples[0].n;
  const auto N = static_cast<double>(samples.size());
  for (const auto& s : samples)
    require(s.d == d && s.n == n, "per_vertex_variance: mixed dimensions");

  Vec mean = Vec::Zero(samples[0].dim());
  for (const auto& s : samples) mean += s.data;
  mean /= N;
  Vec ss = Vec::Zero(samples[0].dim());
  for (const auto& s : samples) {
    Vec r = s.data - mean;
    ss += r.cwiseProduct(r);
  }
  ss /= (N - 1.0);

  PerVertexVariance pv;
  pv.values = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) pv.values[i] += ss[i * d + k];
  return pv;
}

}  // namespace ssms
