#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nhscope/error.hpp"
#include "nhscope/models.hpp"

namespace nhscope {

/// Eigenpairs of a dense non-Hermitian matrix.
///
/// Columns of `right` are unit-norm right eigenvectors, each rotated so that its largest-magnitude
/// entry is real and positive. Eigenvalues are sorted by (real, imaginary) ascending. When present,
/// `left` holds left eigenvectors (eigenvectors of H^dagger) paired column by column with `right`
/// and scaled so that left.col(n).dot(right.col(n)) == 1.
template <typename Real>
struct BasicEigenSystem {
  using ComplexScalar = std::complex<Real>;
  using Vector = Eigen::Matrix<ComplexScalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<ComplexScalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector eigenvalues;
  Matrix right;
  std::optional<Matrix> left;
  Real residual_right = 0;  // max_n |H R_n - E_n R_n| / |H|_F
  std::optional<Real> biorth_residual;  // max |<L_n|R_m> - delta_nm|

  Eigen::Index dim() const noexcept { return eigenvalues.size(); }
};

using EigenSystem = BasicEigenSystem<double>;

struct SpectrumSummary {
  double max_imag = 0.0;  // max_n |Im E_n|
  bool is_real = true;
  double min_gap = 0.0;  // min_{n != m} |E_n - E_m|; 0 for a single level
};

namespace detail {

template <typename Derived>
void require_square_finite(const Eigen::MatrixBase<Derived>& H) {
  if (H.rows() != H.cols())
    throw Error(ErrorKind::InvalidInput, "matrix is not square (" + std::to_string(H.rows()) + "x" +
                                             std::to_string(H.cols()) + ")");
  if (H.rows() == 0) throw Error(ErrorKind::InvalidInput, "matrix is empty");
  if (!H.allFinite()) throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
}

[[noreturn]] inline void solver_failed(Eigen::Index dim, Eigen::Index max_iterations, const char* which) {
  throw Error(ErrorKind::NumericalFailure,
              std::string(which) + " did not converge for a " + std::to_string(dim) + "x" + std::to_string(dim) +
                  " matrix (iteration cap " + std::to_string(max_iterations) + ")");
}

template <typename Real>
Real frobenius_or_one(const typename BasicEigenSystem<Real>::Matrix& H) {
  const Real n = H.norm();
  return n > Real(0) ? n : Real(1);
}

/// Normalize, phase-fix, sort, and compute the right residual.
template <typename Real>
void finalize(BasicEigenSystem<Real>& es, const typename BasicEigenSystem<Real>::Matrix& H) {
  using C = std::complex<Real>;
  const Eigen::Index n = es.eigenvalues.size();

  for (Eigen::Index j = 0; j < n; ++j) {
    auto col = es.right.col(j);
    const Real norm = col.norm();
    if (norm > Real(0)) col /= norm;
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    const C pivot = col(imax);
    if (std::abs(pivot) > Real(0)) col *= std::conj(pivot) / std::abs(pivot);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const C& x = es.eigenvalues(a);
    const C& y = es.eigenvalues(b);
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  typename BasicEigenSystem<Real>::Vector values(n);
  typename BasicEigenSystem<Real>::Matrix vectors(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    values(j) = es.eigenvalues(order[static_cast<std::size_t>(j)]);
    vectors.col(j) = es.right.col(order[static_cast<std::size_t>(j)]);
  }
  es.eigenvalues = std::move(values);
  es.right = std::move(vectors);

  // One product for all columns; a real H takes two real products instead of one complex one.
  using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  typename BasicEigenSystem<Real>::Matrix HR(n, n);
  if (H.imag().isZero(Real(0))) {
    const RealMatrix Hr = H.real();
    HR.real() = Hr * es.right.real();
    HR.imag() = Hr * es.right.imag();
  } else {
    HR.noalias() = H * es.right;
  }
  HR -= es.right * es.eigenvalues.asDiagonal();
  es.residual_right = n > 0 ? HR.colwise().norm().maxCoeff() / frobenius_or_one<Real>(H) : Real(0);
}

}  // namespace detail

/// Right eigendecomposition. Real-valued input is routed through the real Schur solver; anything
/// else through the complex one. Defective input is accepted and yields whatever nearly parallel
/// basis the solver produces, with the residual recorded.
template <typename Derived>
BasicEigenSystem<typename Eigen::NumTraits<typename Derived::Scalar>::Real> eig_right(
    const Eigen::MatrixBase<Derived>& H) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  using System = BasicEigenSystem<Real>;
  using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

  detail::require_square_finite(H);
  const typename System::Matrix Hc = H.template cast<std::complex<Real>>();
  const Eigen::Index n = Hc.rows();

  System es;
  if (Hc.imag().isZero(Real(0))) {
    const RealMatrix Hr = Hc.real();
    Eigen::EigenSolver<RealMatrix> solver;
    solver.compute(Hr, true);
    if (solver.info() != Eigen::Success) detail::solver_failed(n, solver.getMaxIterations() * n, "real Schur solver");
    es.eigenvalues = solver.eigenvalues();
    es.right = solver.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<typename System::Matrix> solver;
    solver.compute(Hc, true);
    if (solver.info() != Eigen::Success)
      detail::solver_failed(n, solver.getMaxIterations() * n, "complex Schur solver");
    es.eigenvalues = solver.eigenvalues();
    es.right = solver.eigenvectors();
  }
  detail::finalize(es, Hc);
  return es;
}

inline EigenSystem eig_right(const Hamiltonian& h) { return eig_right(h.matrix); }

/// Right and left eigenvectors with biorthogonal normalization.
///
/// Left eigenvectors come from an independent decomposition of H^dagger. Each conjugated left
/// eigenvalue is matched to a right eigenvalue greedily, smallest distance first, each used once.
/// A match farther apart than `pairing_tol * |H|_F` raises PairingFailure.
template <typename Derived>
BasicEigenSystem<typename Eigen::NumTraits<typename Derived::Scalar>::Real> eig_biorthogonal(
    const Eigen::MatrixBase<Derived>& H, double pairing_tol = 1e-6) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  using System = BasicEigenSystem<Real>;
  using C = std::complex<Real>;

  const typename System::Matrix Hc = H.template cast<C>();
  System es = eig_right(Hc);
  const System adj = eig_right(typename System::Matrix(Hc.adjoint()));
  const Eigen::Index n = es.dim();

  struct Candidate {
    Real distance;
    Eigen::Index right, left;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index l = 0; l < n; ++l)
      candidates.push_back({std::abs(std::conj(adj.eigenvalues(l)) - es.eigenvalues(r)), r, l});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });

  std::vector<Eigen::Index> partner(static_cast<std::size_t>(n), -1);
  std::vector<bool> left_used(static_cast<std::size_t>(n), false);
  Real worst = 0;
  Eigen::Index assigned = 0;
  for (const auto& c : candidates) {
    if (assigned == n) break;
    if (partner[static_cast<std::size_t>(c.right)] >= 0 || left_used[static_cast<std::size_t>(c.left)]) continue;
    partner[static_cast<std::size_t>(c.right)] = c.left;
    left_used[static_cast<std::size_t>(c.left)] = true;
    worst = std::max(worst, c.distance);
    ++assigned;
  }
  const Real tol = Real(pairing_tol) * detail::frobenius_or_one<Real>(Hc);
  if (worst > tol)
    throw Error(ErrorKind::PairingFailure, "left/right eigenvalue pairing distance " + std::to_string(double(worst)) +
                                               " exceeds " + std::to_string(double(tol)) +
                                               " (near-degenerate or defective spectrum)");

  typename System::Matrix left(n, n);
  bool singular = false;
  for (Eigen::Index r = 0; r < n; ++r) {
    left.col(r) = adj.right.col(partner[static_cast<std::size_t>(r)]);
    const C overlap = left.col(r).dot(es.right.col(r));  // <L|R>
    if (overlap == C(0)) {
      singular = true;
      continue;
    }
    left.col(r) /= std::conj(overlap);
  }
  es.biorth_residual = singular ? std::numeric_limits<Real>::infinity()
                                : (left.adjoint() * es.right - System::Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  es.left = std::move(left);
  return es;
}

inline EigenSystem eig_biorthogonal(const Hamiltonian& h, double pairing_tol = 1e-6) {
  return eig_biorthogonal(h.matrix, pairing_tol);
}

template <typename Real>
SpectrumSummary spectrum_summary(const BasicEigenSystem<Real>& es, double real_tol = 1e-10) {
  SpectrumSummary s;
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < es.dim(); ++i) {
    s.max_imag = std::max(s.max_imag, double(std::abs(es.eigenvalues(i).imag())));
    max_abs = std::max(max_abs, double(std::abs(es.eigenvalues(i))));
  }
  s.is_real = s.max_imag <= real_tol * std::max(1.0, max_abs);
  if (es.dim() >= 2) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.dim(); ++i)
      for (Eigen::Index j = i + 1; j < es.dim(); ++j)
        gap = std::min(gap, double(std::abs(es.eigenvalues(i) - es.eigenvalues(j))));
    s.min_gap = gap;
  }
  return s;
}

}  // namespace nhscope
