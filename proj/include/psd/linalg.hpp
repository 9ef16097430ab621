#pragma once

#include "psd/types.hpp"

#include <cmath>
#include <limits>

namespace psd {

struct SymmetricEigen {
  Vector values;   // unsorted, matching columns of `vectors`
  Matrix vectors;  // orthonormal columns
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps rotate every off-diagonal pair until the off-diagonal Frobenius
/// norm falls below `tol` times the Frobenius norm of the input. Throws if
/// that does not happen within `max_sweeps`.
inline SymmetricEigen jacobi_eigen(const Matrix& input, double tol = 1e-12, int max_sweeps = 100) {
  require(input.rows() == input.cols(), "jacobi_eigen: matrix is not square");
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  SymmetricEigen out;
  if (scale == 0.0 || n < 2) {
    out.values = a.diagonal();
    out.vectors = v;
    return out;
  }

  int sweep = 0;
  while (off_norm() > tol * scale) {
    if (sweep == max_sweeps) throw Error("jacobi_eigen: no convergence within sweep limit");
    ++sweep;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  out.values = a.diagonal();
  out.vectors = std::move(v);
  out.sweeps = sweep;
  return out;
}

/// Ratio of largest to smallest singular value; infinity when singular.
inline double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smallest = s[s.size() - 1];
  return smallest == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / smallest;
}

}  // namespace psd
