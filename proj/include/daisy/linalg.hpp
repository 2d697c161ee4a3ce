#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>

namespace daisy {

using complex_t = std::complex<double>;

/// Dense complex matrix, row-major so that antenna rows h_m are contiguous.
using cmatrix = Eigen::Matrix<complex_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using cvector = Eigen::Matrix<complex_t, Eigen::Dynamic, 1>;

inline cmatrix identity(Eigen::Index k) { return cmatrix::Identity(k, k); }

inline bool all_finite(const cmatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const complex_t v = a.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const cmatrix& a, const cmatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace daisy
