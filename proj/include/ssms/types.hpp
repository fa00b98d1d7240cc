#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ssms {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A point in ambient space R^(d*n), stored flat as (x0,y0[,z0],x1,y1,...).
struct Shape {
  Vec data;
  int d = 0;
  int n = 0;

  Shape() = default;
  Shape(Vec v, int d_, int n_) : data(std::move(v)), d(d_), n(n_) {
    if (d < 2 || d > 3) throw std::invalid_argument("Shape: d must be 2 or 3");
    if (n < 1) throw std::invalid_argument("Shape: n must be >= 1");
    if (data.size() != static_cast<Eigen::Index>(d) * n)
      throw std::invalid_argument("Shape: data length != d*n");
  }

  Eigen::Index dim() const { return data.size(); }
};

// Latent coordinates of a model; length must match the model's q.
using Coefficients = Vec;

struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw input_error(msg);
}

}  // namespace ssms
