#include "nhscope/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "parallel.hpp"

namespace nhscope {

namespace {

void require_regime(double t2, double g) {
  if (!(std::abs(g) < t2))
    throw Error(ErrorKind::InvalidRegime, "requires |g| < t2, got t2=" + std::to_string(t2) + ", g=" + std::to_string(g));
}

double boundary_weight(const Eigen::VectorXcd& psi, bool left) {
  const Eigen::Index n = psi.size();
  const Eigen::Index m = std::max<Eigen::Index>(1, n / 10);
  const double total = psi.squaredNorm();
  const double part = left ? psi.head(m).squaredNorm() : psi.tail(m).squaredNorm();
  return total > 0.0 ? part / total : 0.0;
}

}  // namespace

double default_zero_mode_tol(const EigenSystem& es) {
  return 1e-6 * es.eigenvalues.cwiseAbs().maxCoeff();
}

EdgeStatePair extract_zero_modes(const EigenSystem& es, std::optional<double> tol) {
  const Eigen::Index n = es.dim();
  if (n < 2) throw Error(ErrorKind::NoEdgeModes, "spectrum has fewer than two states");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(es.eigenvalues(a)) < std::abs(es.eigenvalues(b)); });

  if (tol) {
    const auto below = std::count_if(order.begin(), order.end(),
                                     [&](Eigen::Index i) { return std::abs(es.eigenvalues(i)) < *tol; });
    if (below < 2)
      throw Error(ErrorKind::NoEdgeModes, std::to_string(below) + " eigenvalue(s) with |E| < " + std::to_string(*tol) +
                                              "; no pair of zero modes");
    if (below > 2)
      throw Error(ErrorKind::AmbiguousModes,
                  std::to_string(below) + " eigenvalues with |E| < " + std::to_string(*tol) + "; expected two");
  }

  std::array<Eigen::Index, 2> idx{order[0], order[1]};
  std::array<Eigen::VectorXcd, 2> v{es.right.col(idx[0]).normalized(), es.right.col(idx[1]).normalized()};
  std::array<double, 2> lw{boundary_weight(v[0], true), boundary_weight(v[1], true)};
  std::array<double, 2> rw{boundary_weight(v[0], false), boundary_weight(v[1], false)};
  if (lw[1] - rw[1] > lw[0] - rw[0]) {
    std::swap(idx[0], idx[1]);
    std::swap(v[0], v[1]);
    std::swap(lw[0], lw[1]);
    std::swap(rw[0], rw[1]);
  }

  EdgeStatePair p;
  p.stateL = std::move(v[0]);
  p.stateR = std::move(v[1]);
  p.indices = idx;
  p.energies = {es.eigenvalues(idx[0]), es.eigenvalues(idx[1])};
  p.overlap = std::min(1.0, std::abs(p.stateL.dot(p.stateR)));
  p.left_weight = lw;
  p.right_weight = rw;
  return p;
}

AnalyticEdgeStates analytic_edge_states(double t1, double t2, double g, int cells) {
  require_regime(t2, g);
  if (!(t1 > 0.0)) throw Error(ErrorKind::InvalidInput, "t1 must be positive, got " + std::to_string(t1));
  if (cells < 2) throw Error(ErrorKind::InvalidInput, "cells must be >= 2");

  AnalyticEdgeStates s;
  s.a_ratio = -t1 / (t2 + g);
  s.b_ratio = -t1 / (t2 - g);
  constexpr double kCritical = 1e-12;
  s.critical = std::abs(std::abs(s.a_ratio) - 1.0) <= kCritical || std::abs(std::abs(s.b_ratio) - 1.0) <= kCritical;
  s.a_vanished = std::abs(s.a_ratio) > 1.0 + kCritical;
  s.b_vanished = std::abs(s.b_ratio) > 1.0 + kCritical;

  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(cells);
  s.a_mode = Eigen::VectorXcd::Zero(dim);
  s.b_mode = Eigen::VectorXcd::Zero(dim);
  if (!s.a_vanished) {
    double amp = 1.0;
    for (int n = 0; n < cells; ++n, amp *= s.a_ratio) s.a_mode(2 * n) = amp;
    s.a_mode.normalize();
  }
  if (!s.b_vanished) {
    double amp = 1.0;
    for (int n = cells - 1; n >= 0; --n, amp *= s.b_ratio) s.b_mode(2 * n + 1) = amp;
    s.b_mode.normalize();
  }
  return s;
}

std::vector<EdgeScanPoint> edge_transition_scan(double t2, double g, int cells, std::span<const double> t1_grid,
                                                const EdgeScanOptions& options) {
  std::vector<EdgeScanPoint> out(t1_grid.size());
  detail::parallel_for(t1_grid.size(), detail::resolve_threads(options.threads), [&](std::size_t i) {
    const double t1 = t1_grid[i];
    try {
      const auto es = eig_right(build_nonreciprocal_ssh(t1, t2, g, cells, Boundary::Open));
      out[i] = {t1, extract_zero_modes(es, options.tol).overlap, eta(es)};
    } catch (const Error& e) {
      throw Error(e.kind(), "at t1=" + std::to_string(t1) + " (cells=" + std::to_string(cells) + "): " + e.what());
    }
  });
  return out;
}

std::optional<std::size_t> overlap_transition(std::span<const EdgeScanPoint> scan, double threshold) {
  std::size_t i = scan.size();
  while (i > 0 && scan[i - 1].overlap > threshold) --i;
  if (i == scan.size()) return std::nullopt;
  return i;
}

Hamiltonian effective_bloch(double t1, double t2, double g, double k) {
  require_regime(t2, g);
  const double t2bar = std::sqrt((t2 - g) * (t2 + g));
  const double dx = t1 + t2bar * std::cos(k);
  const double dy = t2bar * std::sin(k);
  Hamiltonian h;
  h.matrix.resize(2, 2);
  h.matrix << 0.0, Complex(dx, -dy), Complex(dx, dy), 0.0;
  h.labels = {{0, 0}, {0, 1}};
  return h;
}

SimilarityTransform similarity_transform(double t2, double g, int cells) {
  require_regime(t2, g);
  if (cells < 2) throw Error(ErrorKind::InvalidInput, "cells must be >= 2");
  SimilarityTransform s;
  s.r = std::sqrt((t2 - g) / (t2 + g));
  s.t2bar = std::sqrt((t2 - g) * (t2 + g));
  s.diag.resize(2 * cells);
  double p = 1.0;
  for (int n = 0; n < cells; ++n, p *= s.r) s.diag(2 * n) = s.diag(2 * n + 1) = p;
  return s;
}

double similarity_check(double t1, double t2, double g, int cells) {
  const auto s = similarity_transform(t2, g, cells);
  const auto H = build_nonreciprocal_ssh(t1, t2, g, cells, Boundary::Open).matrix;
  const auto ref = build_nonreciprocal_ssh(t1, s.t2bar, 0.0, cells, Boundary::Open).matrix;
  const Eigen::MatrixXcd Hbar = s.diag.cwiseInverse().asDiagonal() * H * s.diag.asDiagonal();
  return (Hbar - ref).cwiseAbs().maxCoeff();
}

BulkBiorthogonality bulk_biorthogonality_check(double t1, double t2, double g, int cells) {
  const auto s = similarity_transform(t2, g, cells);
  const Eigen::MatrixXcd H = build_nonreciprocal_ssh(t1, t2, g, cells, Boundary::Open).matrix;
  const Eigen::MatrixXd hermitian = build_nonreciprocal_ssh(t1, s.t2bar, 0.0, cells, Boundary::Open).matrix.real();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hermitian);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::NumericalFailure, "symmetric eigensolver failed on the transformed chain");
  const Eigen::MatrixXd& phi = solver.eigenvectors();
  const Eigen::VectorXd& E = solver.eigenvalues();

  const Eigen::MatrixXcd R = (s.diag.asDiagonal() * phi).cast<Complex>();
  const Eigen::MatrixXcd L = (s.diag.cwiseInverse().asDiagonal() * phi).cast<Complex>();
  const double scale = H.norm();

  BulkBiorthogonality b;
  b.states = R.cols();
  b.biorth_residual = (L.adjoint() * R - Eigen::MatrixXcd::Identity(b.states, b.states)).cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd rres = H * R - R * E.asDiagonal();
  const Eigen::MatrixXcd lres = H.adjoint() * L - L * E.asDiagonal();
  b.right_residual = (rres.colwise().norm().array() / R.colwise().norm().array()).maxCoeff() / scale;
  b.left_residual = (lres.colwise().norm().array() / L.colwise().norm().array()).maxCoeff() / scale;
  return b;
}

std::pair<Complex, Complex> pt_dispersion(double u, double v, double w, double k) {
  const Complex I(0.0, 1.0);
  const double d2 = std::norm(w * std::exp(-I * k) + v);
  const Complex e = std::sqrt(Complex(d2 - u * u, 0.0));
  return {e, -e};
}

std::optional<std::pair<double, double>> pt_ep_momenta(double u, double v, double w) {
  if (v * w == 0.0) throw Error(ErrorKind::InvalidInput, "exceptional momenta need v*w != 0");
  const double arg = (u * u - v * v - w * w) / (2.0 * v * w);
  if (arg < -1.0 || arg > 1.0) return std::nullopt;
  const double k = std::acos(arg);
  return std::pair{k, -k};
}

namespace {

/// Weights M with M H Hermitian, propagated breadth-first from site 0 along nonzero bonds.
Eigen::VectorXd propagate_weights(const Eigen::MatrixXcd& H) {
  const Eigen::Index n = H.rows();
  const double tol = 1e-10;
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  auto fail = [](const std::string& msg) -> void { throw Error(ErrorKind::Structure, msg); };

  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(H(i, i).imag()) > tol * scale) fail("diagonal entry " + std::to_string(i) + " is not real");

  Eigen::VectorXd M = Eigen::VectorXd::Zero(n);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Eigen::Index root = 0; root < n; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    M(root) = 1.0;
    seen[static_cast<std::size_t>(root)] = true;
    std::deque<Eigen::Index> queue{root};
    while (!queue.empty()) {
      const Eigen::Index i = queue.front();
      queue.pop_front();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const Complex hij = H(i, j), hji = H(j, i);
        const bool a = std::abs(hij) > 0.0, b = std::abs(hji) > 0.0;
        if (!a && !b) continue;
        if (a != b) fail("bond (" + std::to_string(i) + ", " + std::to_string(j) + ") is one-directional");
        const Complex ratio = M(i) * hij / std::conj(hji);
        if (std::abs(ratio.imag()) > tol * std::abs(ratio) || !(ratio.real() > 0.0))
          fail("bond (" + std::to_string(i) + ", " + std::to_string(j) + ") needs a non-positive weight");
        if (!seen[static_cast<std::size_t>(j)]) {
          M(j) = ratio.real();
          seen[static_cast<std::size_t>(j)] = true;
          queue.push_back(j);
        } else if (std::abs(M(j) - ratio.real()) > tol * M(j)) {
          fail("weights are inconsistent around site " + std::to_string(j));
        }
      }
    }
  }
  return M;
}

/// Replaces each cluster of columns by Y (Y^dagger Y)^{-1/2}.
void lowdin_in_clusters(Eigen::MatrixXcd& Y, const Eigen::VectorXcd& E, double width) {
  const Eigen::Index n = Y.cols();
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(E(end) - E(end - 1)) <= width) ++end;
    const Eigen::Index m = end - start;
    if (m > 1) {
      const Eigen::MatrixXcd S = Y.middleCols(start, m).adjoint() * Y.middleCols(start, m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S);
      const Eigen::MatrixXcd inv_sqrt =
          es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
      Y.middleCols(start, m) = (Y.middleCols(start, m) * inv_sqrt).eval();
    }
    start = end;
  }
}

}  // namespace

SturmLiouvilleReport sturm_liouville_verify(const Hamiltonian& H, double t0, double g, double real_tol) {
  const Eigen::Index dim = H.dim();
  if (dim < 6 || dim % 3 != 0)
    throw Error(ErrorKind::Structure, "dimension " + std::to_string(dim) + " is not that of a three-site chain");
  const int cells = static_cast<int>(dim / 3);
  const double scale = std::max(1.0, H.matrix.norm());
  const bool matches_open =
      (H.matrix - build_sturm_liouville_chain(t0, g, cells, Boundary::Open).matrix).norm() <= 1e-10 * scale;
  const bool matches_periodic =
      (H.matrix - build_sturm_liouville_chain(t0, g, cells, Boundary::Periodic).matrix).norm() <= 1e-10 * scale;
  if (!matches_open && !matches_periodic)
    throw Error(ErrorKind::Structure, "matrix is not the three-site chain with t0=" + std::to_string(t0) +
                                          ", g=" + std::to_string(g));

  SturmLiouvilleReport rep;
  rep.M = propagate_weights(H.matrix);
  rep.H0 = rep.M.asDiagonal() * H.matrix;
  if ((rep.H0 - rep.H0.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(ErrorKind::Structure, "M H is not Hermitian");

  const EigenSystem es = eig_right(H.matrix);
  const SpectrumSummary summary = spectrum_summary(es, real_tol);
  rep.spectrum_real = summary.is_real;
  rep.max_imag = summary.max_imag;

  const Eigen::VectorXd sqrtM = rep.M.cwiseSqrt();
  Eigen::MatrixXcd Y = sqrtM.asDiagonal() * es.right;
  Y.colwise().normalize();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(dim, dim);
  rep.raw_completeness_residual = (Y.adjoint() * Y - I).cwiseAbs().maxCoeff();

  const double width = 1e-4 * std::max(1.0, es.eigenvalues.cwiseAbs().maxCoeff());
  lowdin_in_clusters(Y, es.eigenvalues, width);
  rep.completeness_residual = (Y.adjoint() * Y - I).cwiseAbs().maxCoeff();

  const Eigen::MatrixXcd Psi = sqrtM.cwiseInverse().asDiagonal() * Y;
  const Eigen::MatrixXcd res = H.matrix * Psi - Psi * es.eigenvalues.asDiagonal();
  rep.eigen_residual = (res.colwise().norm().array() / Psi.colwise().norm().array()).maxCoeff() / H.matrix.norm();
  return rep;
}

std::string_view to_string(TransitionSource s) noexcept {
  return s == TransitionSource::EtaJump ? "eta_jump" : "overlap_crossing";
}

std::vector<FiniteSizePoint> finite_size_scan(double t2, double g, std::span<const int> sizes,
                                              std::span<const double> t1_grid, const FiniteSizeOptions& options) {
  if (sizes.empty()) throw Error(ErrorKind::InvalidInput, "no sizes given");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw Error(ErrorKind::InvalidInput, "sizes must be strictly increasing");
  const std::vector<double> grid(t1_grid.begin(), t1_grid.end());

  std::vector<FiniteSizePoint> out;
  for (int L : sizes) {
    const auto scan = edge_transition_scan(t2, g, L, grid, {std::nullopt, options.threads});
    const auto crossing = overlap_transition(scan);
    if (!crossing || *crossing == 0)
      throw Error(ErrorKind::InvalidInput, "the t1 grid does not bracket the edge-state transition for cells=" +
                                               std::to_string(L));
    const std::size_t c = *crossing - 1;  // interval [c, c+1] holds the crossing

    Detector det = options.detector;
    if (det.floor <= 0.0) {
      const double N = 2.0 * L;
      det.floor = 1.0 / (N * (N - 1.0));
    }
    std::vector<double> etas;
    for (const auto& p : scan) etas.push_back(p.eta);
    const auto report = detect_discontinuities(etas, grid, det, JumpKind::Eta);

    std::optional<std::size_t> chosen;
    for (const auto& loc : report.locations) {
      const auto d = loc.interval > c ? loc.interval - c : c - loc.interval;
      if (d > 1) continue;
      if (!chosen || loc.magnitude > std::abs(etas[*chosen + 1] - etas[*chosen])) chosen = loc.interval;
    }
    const std::size_t i = chosen.value_or(c);
    out.push_back({L, 0.5 * (grid[i] + grid[i + 1]),
                   chosen ? TransitionSource::EtaJump : TransitionSource::OverlapCrossing});
  }
  return out;
}

}  // namespace nhscope
