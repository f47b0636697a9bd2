#pragma once

// Small dense symmetric linear algebra: Jacobi eigendecomposition, Cholesky,
// quadratic-form norms and the nearest-point projections used by the
// feasibility engine.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cjsr/error.hpp"

namespace cjsr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Every tolerance used by the linear-algebra layer, in one place.
struct NumericPolicy {
  double symmetry_tol = 1e-12;     // max |M_ij - M_ji| accepted on construction
  double jacobi_threshold = 1e-12; // off-diagonal stopping threshold (relative)
  int jacobi_max_sweeps = 100;
  double pd_floor = 1e-12;         // lambda_min must exceed this to count as PD
  double quad_clamp = 1e-12;       // negative quadratic forms above -this clamp to 0
};

inline const NumericPolicy& default_policy() {
  static const NumericPolicy policy{};
  return policy;
}

class SymMatrix {
 public:
  SymMatrix() = default;

  /// Accepts nearly symmetric input and stores (M + M^T) / 2.
  explicit SymMatrix(const Mat& m, const NumericPolicy& policy = default_policy()) {
    detail::require(m.rows() == m.cols() && m.rows() >= 1,
                    "symmetric matrix must be square and non-empty");
    detail::require(m.allFinite(), "symmetric matrix has non-finite entries");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asym > policy.symmetry_tol * scale) {
      throw InvalidArgument("matrix is not symmetric (max asymmetry " +
                            std::to_string(asym) + ")");
    }
    m_ = 0.5 * (m + m.transpose());
  }

  static SymMatrix identity(Eigen::Index n) { return SymMatrix(Mat::Identity(n, n)); }
  static SymMatrix outer(const Vec& v) { return SymMatrix(v * v.transpose()); }

  Eigen::Index order() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double frobenius() const { return m_.norm(); }

  /// Frobenius inner product <A, B> = trace(A B).
  double dot(const SymMatrix& other) const { return m_.cwiseProduct(other.m_).sum(); }

  friend SymMatrix operator*(double s, const SymMatrix& a) {
    SymMatrix r;
    r.m_ = s * a.m_;
    return r;
  }
  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix r;
    r.m_ = a.m_ + b.m_;
    return r;
  }
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix r;
    r.m_ = a.m_ - b.m_;
    return r;
  }

 private:
  Mat m_;
};

struct SymEigen {
  Vec values;   // ascending
  Mat vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)

  double min() const { return values(0); }
  double max() const { return values(values.size() - 1); }
};

/// Cyclic Jacobi rotations until the off-diagonal mass drops below the
/// threshold relative to the Frobenius norm.
inline SymEigen sym_eigen(const SymMatrix& m, const NumericPolicy& policy = default_policy()) {
  const Eigen::Index n = m.order();
  Mat a = m.mat();
  Mat v = Mat::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  while (off_norm() > policy.jacobi_threshold * scale) {
    if (++sweep > policy.jacobi_max_sweeps) {
      throw NumericalError("Jacobi eigensolver did not converge");
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
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
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymEigen out{Vec(n), Mat(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

inline SymMatrix recompose(const SymEigen& e) {
  return SymMatrix(e.vectors * e.values.asDiagonal() * e.vectors.transpose());
}

inline double determinant(const SymMatrix& m) { return sym_eigen(m).values.prod(); }

/// Upper-triangular L with P = L^T L.
inline Mat cholesky(const SymMatrix& p, const NumericPolicy& policy = default_policy()) {
  if (sym_eigen(p, policy).min() <= policy.pd_floor) {
    throw InvalidArgument("cholesky: matrix is not positive definite");
  }
  Eigen::LLT<Mat> llt(p.mat());
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("cholesky: matrix is not positive definite");
  }
  return llt.matrixU();
}

/// sqrt(x^T P x) for P positive semidefinite.
inline double p_norm(const Vec& x, const SymMatrix& p,
                     const NumericPolicy& policy = default_policy()) {
  detail::require(x.size() == p.order(), "p_norm: dimension mismatch");
  double q = x.dot(p.mat() * x);
  if (q < 0.0) {
    const double scale = std::max(1.0, x.squaredNorm() * p.mat().norm());
    if (q < -policy.quad_clamp * scale) {
      throw InvalidArgument("p_norm: quadratic form is negative; P is not PSD");
    }
    q = 0.0;
  }
  return std::sqrt(q);
}

/// Nearest (Frobenius) symmetric matrix with every eigenvalue >= 1.
inline SymMatrix project_psd_floor(const SymMatrix& m) {
  SymEigen e = sym_eigen(m);
  if (e.min() >= 1.0) return m;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) e.values(i) = std::max(e.values(i), 1.0);
  return recompose(e);
}

inline SymMatrix project_frobenius_ball(const SymMatrix& m, double radius) {
  detail::require(radius > 0.0, "Frobenius ball radius must be positive");
  const double f = m.frobenius();
  if (f <= radius) return m;
  return (radius / f) * m;
}

}  // namespace cjsr
