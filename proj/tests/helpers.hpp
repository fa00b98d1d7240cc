#pragma once

#include <Eigen/QR>
#include <vector>

#include "ssms/model.hpp"
#include "ssms/rng.hpp"

namespace test {

using ssms::Coefficients;
using ssms::Mat;
using ssms::Shape;
using ssms::ShapeModel;
using ssms::Vec;

inline Mat random_orthonormal(int rows, int cols, ssms::Rng& rng) {
  Mat G(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  return qr.householderQ() * Mat::Identity(rows, cols);
}

// Valid model with orthonormal directions and strictly descending spectrum.
inline ShapeModel make_random_model(int d, int n, int q, std::uint64_t seed) {
  ssms::Rng rng(seed);
  const int dn = d * n;
  Mat U = random_orthonormal(dn, q, rng);
  ShapeModel m;
  Vec mean(dn);
  for (int i = 0; i < dn; ++i) mean[i] = rng.normal();
  m.mean = Shape(mean, d, n);
  m.eigenvalues.resize(q);
  for (int i = 0; i < q; ++i) m.eigenvalues[i] = 2.0 / (i + 1) + 0.1;
  m.basis.resize(dn, q);
  for (int i = 0; i < q; ++i)
    m.basis.col(i) = U.col(i) * std::sqrt(m.eigenvalues[i]);
  return m;
}

inline Shape random_shape(int d, int n, ssms::Rng& rng) {
  Vec v(d * n);
  for (int i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return Shape(v, d, n);
}

inline Coefficients random_coefficients(int q, ssms::Rng& rng) {
  Coefficients a(q);
  for (int i = 0; i < q; ++i) a[i] = rng.normal();
  return a;
}

}  // namespace test
