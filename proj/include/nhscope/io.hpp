#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nhscope/analysis.hpp"
#include "nhscope/petermann.hpp"
#include "nhscope/spectral.hpp"

namespace nhscope {

// All writers emit a header row and print reals with 17 significant digits so that outputs are
// reproducible byte for byte.

std::string format_real(double x);

/// index,re_E,im_E
void write_spectrum_csv(std::ostream& out, const EigenSystem& es);

/// site,re_psi,im_psi,abs2
void write_eigenvector_csv(std::ostream& out, const Eigen::VectorXcd& psi);

/// param,eta,deta,flag. The flag column holds eta_jump, deta_jump or nothing; eta_jump wins when a
/// sample carries both.
void write_sweep_csv(std::ostream& out, const SweepResult& sw);

/// site,abs2_state1,abs2_state2 with state1 = stateL, state2 = stateR.
void write_edge_csv(std::ostream& out, const EdgeStatePair& pair);

/// t1,overlap,eta
void write_edge_scan_csv(std::ostream& out, std::span<const EdgeScanPoint> scan);

/// L,t1_star
void write_finite_size_csv(std::ostream& out, std::span<const FiniteSizePoint> points);

/// {"kind", "locations": [{param_left, param_right, magnitude}], "detector": {w, kappa, floor}}
std::string discontinuity_json(const DiscontinuityReport& report);

/// [eta report, deta report]
std::string discontinuity_json(const SweepReports& reports);

/// {"k_ep_plus", "k_ep_minus", "exists"}; momenta are null when no EP exists.
std::string ep_report_json(const std::optional<std::pair<double, double>>& momenta);

}  // namespace nhscope
