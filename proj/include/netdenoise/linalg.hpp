#pragma once

// Symmetric eigensolvers: dense (Eigen) for moderate n, Lanczos with full
// reorthogonalization for large n.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "netdenoise/errors.hpp"
#include "netdenoise/rng.hpp"

namespace netdenoise {

/// Leading eigenpairs, eigenvalues in decreasing order; vectors are the
/// columns of `vectors`.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

enum class EigenMethod { Auto, Dense, Lanczos };

inline constexpr std::size_t kDenseEigenLimit = 2000;

/// Flips each column so its first coordinate with |x| > 1e-12 is positive.
inline void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > 1e-12) {
        if (v(r, c) < 0) v.col(c) *= -1.0;
        break;
      }
}

inline EigenPairs dense_top_eigenpairs(const Eigen::MatrixXd& a, int k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  const Eigen::Index n = a.rows();
  EigenPairs out{Eigen::VectorXd(k), Eigen::MatrixXd(n, k)};
  for (int c = 0; c < k; ++c) {  // ascending order from Eigen
    out.values(c) = es.eigenvalues()(n - 1 - c);
    out.vectors.col(c) = es.eigenvectors().col(n - 1 - c);
  }
  fix_signs(out.vectors);
  return out;
}

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Top-k eigenpairs of the symmetric operator `apply` by Lanczos with full
/// reorthogonalization. Stops once every wanted Ritz residual is below
/// tol * max(1, |theta|); the Krylov dimension is capped at n.
inline EigenPairs lanczos_top_eigenpairs(const MatVec& apply, Eigen::Index n, int k,
                                         double tol = 1e-10, std::uint64_t seed = 0x1a2c05) {
  if (k < 1 || k > n) throw ConfigError("eigenpair count out of range");
  Eigen::MatrixXd basis(n, std::min<Eigen::Index>(n, 64));
  std::vector<double> alpha, beta;
  Rng rng(seed);
  auto random_unit = [&](Eigen::Index used) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform() - 0.5;
    for (int pass = 0; pass < 2; ++pass)
      if (used > 0) v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
    return Eigen::VectorXd(v / v.norm());
  };

  Eigen::VectorXd w(n);
  basis.col(0) = random_unit(0);
  Eigen::Index m = 0;
  while (true) {
    apply(basis.col(m), w);
    if (m > 0) w -= beta.back() * basis.col(m - 1);
    alpha.push_back(basis.col(m).dot(w));
    w -= alpha.back() * basis.col(m);
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
    const double b = w.norm();
    ++m;

    const bool exhausted = m == n;
    // A breakdown only means one invariant subspace is exhausted; other
    // copies of a repeated eigenvalue can still be missing, so keep going.
    const bool check = m >= k && (exhausted || (m % 4 == 0 && b >= 1e-12));
    if (check) {
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                  : Eigen::VectorXd(0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub);
      bool converged = true;
      for (int c = 0; c < k; ++c) {
        const Eigen::Index idx = m - 1 - c;
        const double theta = tri.eigenvalues()(idx);
        const double resid = std::abs(b * tri.eigenvectors()(m - 1, idx));
        if (resid > tol * std::max(1.0, std::abs(theta))) converged = false;
      }
      if (converged || exhausted) {
        if (!converged) throw ConvergenceError("Lanczos did not converge within n steps");
        EigenPairs out{Eigen::VectorXd(k), Eigen::MatrixXd(n, k)};
        for (int c = 0; c < k; ++c) {
          const Eigen::Index idx = m - 1 - c;
          out.values(c) = tri.eigenvalues()(idx);
          out.vectors.col(c) = basis.leftCols(m) * tri.eigenvectors().col(idx);
          out.vectors.col(c).normalize();
        }
        fix_signs(out.vectors);
        return out;
      }
    }
    if (m >= basis.cols()) basis.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, 2 * basis.cols()));
    if (b < 1e-12) {
      // Invariant subspace found; continue from a fresh orthogonal direction.
      beta.push_back(0.0);
      basis.col(m) = random_unit(m);
    } else {
      beta.push_back(b);
      basis.col(m) = w / b;
    }
  }
}

inline EigenPairs top_eigenpairs(const Eigen::MatrixXd& a, int k, EigenMethod method = EigenMethod::Auto) {
  if (k < 1 || k > a.rows()) throw ConfigError("eigenpair count out of range");
  if (method == EigenMethod::Dense ||
      (method == EigenMethod::Auto && static_cast<std::size_t>(a.rows()) <= kDenseEigenLimit))
    return dense_top_eigenpairs(a, k);
  return lanczos_top_eigenpairs([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = a * x; },
                                a.rows(), k);
}

/// Number of eigenvalues below -tol. Dense spectrum for n <= 2000,
/// otherwise the inertia of an LDL^T factorization (Sylvester's law).
inline int count_negative_eigenvalues(const Eigen::MatrixXd& a, double tol = 1e-8) {
  if (static_cast<std::size_t>(a.rows()) <= kDenseEigenLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    return static_cast<int>((es.eigenvalues().array() < -tol).count());
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a + tol * Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  return static_cast<int>((ldlt.vectorD().array() < 0.0).count());
}

}  // namespace netdenoise
