#include "nhscope/io.hpp"

#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace nhscope {

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);  // no "-0"
  return buf;
}

void write_spectrum_csv(std::ostream& out, const EigenSystem& es) {
  out << "index,re_E,im_E\n";
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    out << i << ',' << format_real(es.eigenvalues(i).real()) << ',' << format_real(es.eigenvalues(i).imag()) << '\n';
}

void write_eigenvector_csv(std::ostream& out, const Eigen::VectorXcd& psi) {
  out << "site,re_psi,im_psi,abs2\n";
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    out << i << ',' << format_real(psi(i).real()) << ',' << format_real(psi(i).imag()) << ','
        << format_real(std::norm(psi(i))) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepResult& sw) {
  out << "param,eta,deta,flag\n";
  for (std::size_t i = 0; i < sw.samples.size(); ++i) {
    const auto& s = sw.samples[i];
    const char* flag = s.has(SampleFlag::EtaJump) ? "eta_jump" : s.has(SampleFlag::DetaJump) ? "deta_jump" : "";
    out << format_real(s.param) << ',' << format_real(s.eta) << ','
        << format_real(i < sw.deta.size() ? sw.deta[i] : 0.0) << ',' << flag << '\n';
  }
}

void write_edge_csv(std::ostream& out, const EdgeStatePair& pair) {
  out << "site,abs2_state1,abs2_state2\n";
  for (Eigen::Index i = 0; i < pair.stateL.size(); ++i)
    out << i << ',' << format_real(std::norm(pair.stateL(i))) << ',' << format_real(std::norm(pair.stateR(i)))
        << '\n';
}

void write_edge_scan_csv(std::ostream& out, std::span<const EdgeScanPoint> scan) {
  out << "t1,overlap,eta\n";
  for (const auto& p : scan) out << format_real(p.t1) << ',' << format_real(p.overlap) << ',' << format_real(p.eta) << '\n';
}

void write_finite_size_csv(std::ostream& out, std::span<const FiniteSizePoint> points) {
  out << "L,t1_star\n";
  for (const auto& p : points) out << p.L << ',' << format_real(p.t1_star) << '\n';
}

namespace {

nlohmann::ordered_json to_json(const DiscontinuityReport& report) {
  nlohmann::ordered_json locations = nlohmann::ordered_json::array();
  for (const auto& loc : report.locations)
    locations.push_back({{"param_left", loc.param_left}, {"param_right", loc.param_right}, {"magnitude", loc.magnitude}});
  return {{"kind", std::string(to_string(report.kind))},
          {"locations", std::move(locations)},
          {"detector", {{"w", report.detector.w}, {"kappa", report.detector.kappa}, {"floor", report.detector.floor}}}};
}

}  // namespace

std::string discontinuity_json(const DiscontinuityReport& report) { return to_json(report).dump(2); }

std::string discontinuity_json(const SweepReports& reports) {
  return nlohmann::ordered_json::array({to_json(reports.eta), to_json(reports.deta)}).dump(2);
}

std::string ep_report_json(const std::optional<std::pair<double, double>>& momenta) {
  nlohmann::ordered_json j;
  j["k_ep_plus"] = momenta ? nlohmann::ordered_json(momenta->first) : nlohmann::ordered_json(nullptr);
  j["k_ep_minus"] = momenta ? nlohmann::ordered_json(momenta->second) : nlohmann::ordered_json(nullptr);
  j["exists"] = momenta.has_value();
  return j.dump(2);
}

}  // namespace nhscope
