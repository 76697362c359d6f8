#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nhscope/models.hpp"
#include "nhscope/petermann.hpp"
#include "nhscope/spectral.hpp"

namespace nhscope {

// ---------------------------------------------------------------------------
// Zero-energy edge modes of the open non-reciprocal SSH chain
// ---------------------------------------------------------------------------

struct EdgeStatePair {
  Eigen::VectorXcd stateL;  // the member with the larger left-minus-right boundary weight
  Eigen::VectorXcd stateR;
  std::array<Complex, 2> energies{};  // energies of stateL, stateR
  std::array<Eigen::Index, 2> indices{};  // their columns in the source EigenSystem
  double overlap = 0.0;  // |<stateL|stateR>|
  // Sum of |psi|^2 over the 10% of sites nearest the left (right) end, per state (L, R).
  std::array<double, 2> left_weight{};
  std::array<double, 2> right_weight{};

  bool left_localized(int state) const { return left_weight[static_cast<std::size_t>(state)] > 0.5; }
  bool right_localized(int state) const { return right_weight[static_cast<std::size_t>(state)] > 0.5; }
};

/// The two states of smallest |E|. With `tol` set, exactly two eigenvalues must satisfy |E| < tol
/// (NoEdgeModes for fewer, AmbiguousModes for more). Unset, the two smallest are taken as they are.
EdgeStatePair extract_zero_modes(const EigenSystem& es, std::optional<double> tol);

/// Default tolerance: 1e-6 times the spectral radius.
double default_zero_mode_tol(const EigenSystem& es);

inline EdgeStatePair extract_zero_modes(const EigenSystem& es) {
  return extract_zero_modes(es, default_zero_mode_tol(es));
}

/// Closed-form zero modes of the open chain built by build_nonreciprocal_ssh.
///
/// With (t2+g) on the B_n -> A_{n+1} matrix entry, the A-sublattice mode decays from the left end
/// with ratio phi_{n+1,A}/phi_{n,A} = -t1/(t2+g), and the B-sublattice mode decays from the right
/// end with ratio phi_{n-1,B}/phi_{n,B} = -t1/(t2-g). A mode whose |ratio| exceeds 1 cannot meet the
/// boundary condition at its own end and is reported as vanished with an all-zero vector.
struct AnalyticEdgeStates {
  Eigen::VectorXcd a_mode;
  Eigen::VectorXcd b_mode;
  double a_ratio = 0.0;
  double b_ratio = 0.0;
  bool a_vanished = false;
  bool b_vanished = false;
  bool critical = false;  // some |ratio| == 1 (within 1e-12): not normalizable as cells -> infinity
};

AnalyticEdgeStates analytic_edge_states(double t1, double t2, double g, int cells);

struct EdgeScanPoint {
  double t1 = 0.0;
  double overlap = 0.0;
  double eta = 0.0;
};

struct EdgeScanOptions {
  std::optional<double> tol;  // forwarded to extract_zero_modes
  int threads = 0;
};

/// Zero-mode overlap and eta at each t1 of an open chain, one decomposition per point.
std::vector<EdgeScanPoint> edge_transition_scan(double t2, double g, int cells, std::span<const double> t1_grid,
                                                const EdgeScanOptions& options = {});

/// Index of the first point of the trailing run with overlap > threshold, i.e. the point after the
/// last upward crossing. Isolated spikes before the run are ignored. nullopt if the last point is
/// below the threshold.
std::optional<std::size_t> overlap_transition(std::span<const EdgeScanPoint> scan, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Bulk of Model I: similarity transform to a Hermitian SSH chain
// ---------------------------------------------------------------------------

/// (t1 + t2bar cos k) sigma_x + t2bar sin k sigma_y with t2bar = sqrt((t2-g)(t2+g)).
Hamiltonian effective_bloch(double t1, double t2, double g, double k);

struct SimilarityTransform {
  double r = 1.0;             // sqrt((t2-g)/(t2+g))
  Eigen::VectorXd diag;       // 1, 1, r, r, ..., r^{N-1}, r^{N-1}
  double t2bar = 0.0;         // sqrt((t2-g)(t2+g))
};

SimilarityTransform similarity_transform(double t2, double g, int cells);

/// max |S^{-1} H S - H_SSH(t1, t2bar)| over entries.
double similarity_check(double t1, double t2, double g, int cells);

/// Left and right eigenvectors built from the Hermitian chain: R = S phi, L = S^{-1} phi.
struct BulkBiorthogonality {
  double biorth_residual = 0.0;  // max |L^dagger R - I|
  double right_residual = 0.0;   // max |H R_n - E_n R_n| / (|H|_F |R_n|)
  double left_residual = 0.0;    // max |H^dagger L_n - E_n L_n| / (|H|_F |L_n|)
  Eigen::Index states = 0;
};

BulkBiorthogonality bulk_biorthogonality_check(double t1, double t2, double g, int cells);

// ---------------------------------------------------------------------------
// Model IV
// ---------------------------------------------------------------------------

/// (+E, -E) with E = sqrt(|w e^{-ik} + v|^2 - u^2), principal branch.
std::pair<Complex, Complex> pt_dispersion(double u, double v, double w, double k);

/// (+k, -k) with k = arccos((u^2 - v^2 - w^2) / (2 v w)); nullopt when the argument is outside [-1, 1].
std::optional<std::pair<double, double>> pt_ep_momenta(double u, double v, double w);

// ---------------------------------------------------------------------------
// Model V: H = M^{-1} H0
// ---------------------------------------------------------------------------

struct SturmLiouvilleReport {
  bool spectrum_real = false;
  double max_imag = 0.0;
  // max |Gram(M^{1/2} Psi) - I| after M-orthonormalizing within clusters of (numerically)
  // degenerate eigenvalues.
  double completeness_residual = 0.0;
  double raw_completeness_residual = 0.0;  // same, with M-normalization only
  double eigen_residual = 0.0;             // max |H Psi_n - E_n Psi_n| / |H|_F for the final basis
  Eigen::VectorXd M;                       // diagonal of M, fixed by M = 1 on the first A site
  Eigen::MatrixXcd H0;                     // M H, Hermitian
};

/// Reconstructs M by propagating weights along every bond so that M H is Hermitian. Throws
/// Structure when the weights are inconsistent, not positive, or H does not match the Model V
/// chain with the given t0 and g.
SturmLiouvilleReport sturm_liouville_verify(const Hamiltonian& H, double t0, double g, double real_tol = 1e-10);

// ---------------------------------------------------------------------------
// Finite-size scan of the edge-state transition
// ---------------------------------------------------------------------------

enum class TransitionSource { EtaJump, OverlapCrossing };

std::string_view to_string(TransitionSource s) noexcept;

struct FiniteSizePoint {
  int L = 0;  // unit cells
  double t1_star = 0.0;
  TransitionSource source = TransitionSource::EtaJump;
};

struct FiniteSizeOptions {
  Detector detector{10, 5.0, 0.0};  // floor 0: use 1 / (N(N-1)) for N = 2L
  int threads = 0;
};

/// Per size, the midpoint of the grid interval holding the edge-state transition. The eta jump is used
/// when one falls within one grid step of the persistent overlap crossing; otherwise the crossing.
std::vector<FiniteSizePoint> finite_size_scan(double t2, double g, std::span<const int> sizes,
                                              std::span<const double> t1_grid,
                                              const FiniteSizeOptions& options = {});

}  // namespace nhscope
