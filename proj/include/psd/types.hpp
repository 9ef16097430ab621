#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace psd {

/// n x d sample matrix, one sample per row.
using Samples = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown for violated preconditions and numerical failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

inline std::span<const double> row_span(const Samples& s, Eigen::Index i) {
  return {s.data() + i * s.cols(), static_cast<std::size_t>(s.cols())};
}

}  // namespace psd
