#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nhscope/error.hpp"
#include "nhscope/models.hpp"
#include "nhscope/spectral.hpp"

namespace nhscope {

// ---------------------------------------------------------------------------
// Generalized Petermann factor
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kEtaRoundoff = 1e-12;

inline double clamp_eta(double eta) {
  if (!(eta >= -kEtaRoundoff && eta <= 1.0 + kEtaRoundoff))
    throw Error(ErrorKind::InternalConsistency, "eta = " + std::to_string(eta) + " is outside [0, 1]");
  return std::clamp(eta, 0.0, 1.0);
}

template <typename Derived>
void require_two_states(const Eigen::MatrixBase<Derived>& vectors) {
  if (vectors.cols() < 2)
    throw Error(ErrorKind::InvalidInput, "eta needs at least two eigenvectors, got " + std::to_string(vectors.cols()));
}

}  // namespace detail

/// eta from a set of eigenvectors (columns), via the Gram matrix of the normalized columns:
/// (|G|_F^2 - N) / (N (N - 1)). Column scaling is irrelevant because columns are normalized first.
template <typename Derived>
double eta_from_vectors(const Eigen::MatrixBase<Derived>& vectors) {
  detail::require_two_states(vectors);
  using Plain = typename Derived::PlainObject;
  Plain unit = vectors;
  unit.colwise().normalize();
  // G is Hermitian, so only its lower triangle is formed.
  const Eigen::Index cols = unit.cols();
  Plain gram = Plain::Zero(cols, cols);
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(unit.adjoint());
  const double n = static_cast<double>(cols);
  const double frob2 =
      static_cast<double>(gram.diagonal().cwiseAbs2().sum()) +
      2.0 * static_cast<double>(gram.template triangularView<Eigen::StrictlyLower>().toDenseMatrix().cwiseAbs2().sum());
  return detail::clamp_eta((frob2 - n) / (n * (n - 1.0)));
}

/// eta by the ratio-of-sums over pairs n < m, evaluated one overlap at a time.
/// Independent of the Gram route; used to cross-check it.
template <typename Derived>
double eta_pairwise(const Eigen::MatrixBase<Derived>& vectors) {
  detail::require_two_states(vectors);
  double num = 0.0, den = 0.0;
  const Eigen::Index n = vectors.cols();
  for (Eigen::Index a = 0; a < n; ++a) {
    const double na = static_cast<double>(vectors.col(a).norm());
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double nb = static_cast<double>(vectors.col(b).norm());
      const double overlap = static_cast<double>(std::abs(vectors.col(a).dot(vectors.col(b)))) / (na * nb);
      num += overlap * overlap;
      den += 1.0;
    }
  }
  return detail::clamp_eta(num / den);
}

template <typename Real>
double eta(const BasicEigenSystem<Real>& es) {
  return eta_from_vectors(es.right);
}

/// Closed form for Model II: |1 - |gamma||^2 / (1 + |gamma|)^2.
double eta_two_level_analytic(double gamma);

struct JordanProfile {
  std::vector<int> blocks;  // sizes d_n of the Jordan blocks

  int dimension() const;
};

/// Upper bound of eta for a matrix with the given Jordan structure:
/// sum_n d_n (d_n - 1) / (N (N - 1)).
double eta_bound(const JordanProfile& profile);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SampleFlag : unsigned { None = 0, EtaJump = 1, DetaJump = 2 };

struct EtaSample {
  double param = 0.0;
  double eta = 0.0;
  SpectrumSummary spectrum;
  unsigned flags = 0;  // bitwise OR of SampleFlag

  bool has(SampleFlag f) const noexcept { return (flags & static_cast<unsigned>(f)) != 0; }
};

struct SweepResult {
  ModelSpec model;  // template the grid values were substituted into
  std::string axis;
  std::vector<EtaSample> samples;
  std::vector<double> deta;

  std::vector<double> grid() const;
  std::vector<double> etas() const;
};

struct SweepOptions {
  double real_tol = 1e-10;  // tolerance for SpectrumSummary::is_real
  int threads = 0;          // 0: NHSCOPE_THREADS or hardware concurrency
};

/// `steps` points from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, int steps);

/// Build -> eig_right -> eta at every grid point, then central-difference derivative.
/// Grid points are evaluated concurrently; results are stored in grid order.
SweepResult sweep(const ModelSpec& model, const std::string& axis, double lo, double hi, int steps,
                  const SweepOptions& options = {});

/// Second-order central differences inside, first-order one-sided differences at both ends.
std::vector<double> derivative(std::span<const double> grid, std::span<const double> series);
std::vector<double> derivative(const SweepResult& sw);

/// (eta(x0) - eta(x0 - h)) / h and (eta(x0 + h) - eta(x0)) / h for one model parameter.
std::pair<double, double> one_sided_slopes(const ModelSpec& model, const std::string& axis, double x0, double h);

// ---------------------------------------------------------------------------
// Discontinuity detection
// ---------------------------------------------------------------------------

enum class JumpKind { Eta, Deta };

struct Detector {
  int w = 10;
  double kappa = 10.0;
  double floor = 1e-3;
};

struct JumpLocation {
  double param_left = 0.0;
  double param_right = 0.0;
  double magnitude = 0.0;
  std::size_t interval = 0;  // index i of the grid interval [grid[i], grid[i+1]]
};

struct DiscontinuityReport {
  JumpKind kind = JumpKind::Eta;
  std::vector<JumpLocation> locations;
  Detector detector;
};

std::string_view to_string(JumpKind kind) noexcept;

/// Flags interval i when |d_i| > max(floor, kappa * median{|d_j| : 0 < |j - i| <= w}) with
/// d_i = series[i+1] - series[i]. Runs of adjacent flagged intervals collapse to the largest jump.
DiscontinuityReport detect_discontinuities(std::span<const double> series, std::span<const double> grid,
                                           const Detector& detector, JumpKind kind = JumpKind::Eta);

/// Detector settings for a sweep. The derivative floor defaults to 1e-2 * max|deta|.
struct DetectorSettings {
  int w = 10;
  double eta_kappa = 10.0;
  double eta_floor = 1e-3;
  double deta_kappa = 10.0;
  std::optional<double> deta_floor;

  Detector eta_detector() const { return {w, eta_kappa, eta_floor}; }
  Detector deta_detector(std::span<const double> deta) const;
};

struct SweepReports {
  DiscontinuityReport eta;
  DiscontinuityReport deta;
};

/// Runs both detectors and sets sample flags. A location flags the left sample of its interval.
SweepReports annotate(SweepResult& sw, const DetectorSettings& settings = {});

/// Index of the largest (smallest) eta; ties go to the smaller parameter value.
std::size_t argmax_eta(const SweepResult& sw);
std::size_t argmin_eta(const SweepResult& sw);

/// Index of the grid point nearest x; ties go to the smaller parameter value.
std::size_t nearest_index(std::span<const double> grid, double x);

}  // namespace nhscope
