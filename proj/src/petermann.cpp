#include "nhscope/petermann.hpp"

#include <cstdio>
#include <limits>
#include <numeric>

#include "parallel.hpp"

namespace nhscope {

double eta_two_level_analytic(double gamma) {
  const double a = std::abs(gamma);
  const double num = 1.0 - a;
  return num * num / ((1.0 + a) * (1.0 + a));
}

int JordanProfile::dimension() const { return std::accumulate(blocks.begin(), blocks.end(), 0); }

double eta_bound(const JordanProfile& profile) {
  for (int d : profile.blocks)
    if (d < 1) throw Error(ErrorKind::InvalidInput, "Jordan block sizes must be >= 1, got " + std::to_string(d));
  const int n = profile.dimension();
  if (n < 2) throw Error(ErrorKind::InvalidInput, "Jordan profile dimension must be >= 2, got " + std::to_string(n));
  double num = 0.0;
  for (int d : profile.blocks) num += static_cast<double>(d) * (d - 1);
  return num / (static_cast<double>(n) * (n - 1));
}

std::vector<double> SweepResult::grid() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.param);
  return out;
}

std::vector<double> SweepResult::etas() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.eta);
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int steps) {
  if (steps < 2) throw Error(ErrorKind::InvalidInput, "grid needs at least 2 points, got " + std::to_string(steps));
  if (!(lo < hi)) throw Error(ErrorKind::InvalidInput, "grid requires lo < hi");
  std::vector<double> g(static_cast<std::size_t>(steps));
  const double h = (hi - lo) / (steps - 1);
  for (int i = 0; i < steps; ++i) g[static_cast<std::size_t>(i)] = lo + h * i;
  g.back() = hi;
  return g;
}

namespace {

std::string point_label(const std::string& axis, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return axis + "=" + buf;
}

void require_axis(const ModelSpec& model, const std::string& axis) {
  const auto& names = parameter_names(model.variant);
  if (std::find(names.begin(), names.end(), axis) == names.end())
    throw Error(ErrorKind::InvalidSpec,
                "model " + std::string(to_string(model.variant)) + " has no parameter '" + axis + "' to sweep");
}

double eta_at(const ModelSpec& model, const std::string& axis, double x) {
  try {
    return eta(eig_right(build(with_param(model, axis, x))));
  } catch (const Error& e) {
    throw Error(e.kind(), "at " + point_label(axis, x) + ": " + e.what());
  }
}

}  // namespace

SweepResult sweep(const ModelSpec& model, const std::string& axis, double lo, double hi, int steps,
                  const SweepOptions& options) {
  if (steps < 3) throw Error(ErrorKind::InvalidInput, "sweep needs at least 3 steps, got " + std::to_string(steps));
  require_axis(model, axis);
  const auto grid = uniform_grid(lo, hi, steps);

  SweepResult sw;
  sw.model = model;
  sw.axis = axis;
  sw.samples.resize(grid.size());
  detail::parallel_for(grid.size(), detail::resolve_threads(options.threads), [&](std::size_t i) {
    const double x = grid[i];
    try {
      const auto es = eig_right(build(with_param(model, axis, x)));
      sw.samples[i] = {x, eta(es), spectrum_summary(es, options.real_tol), 0};
    } catch (const Error& e) {
      throw Error(e.kind(), "at grid point " + std::to_string(i) + " (" + point_label(axis, x) + "): " + e.what());
    }
  });
  sw.deta = derivative(sw);
  return sw;
}

std::vector<double> derivative(std::span<const double> grid, std::span<const double> series) {
  const std::size_t n = grid.size();
  if (series.size() != n) throw Error(ErrorKind::InvalidInput, "grid and series differ in length");
  if (n < 3) throw Error(ErrorKind::InvalidInput, "derivative needs at least 3 samples");
  const double h = (grid[n - 1] - grid[0]) / static_cast<double>(n - 1);
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "grid must be strictly increasing");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double step = grid[i + 1] - grid[i];
    if (std::abs(step - h) > 1e-9 * std::max(std::abs(h), std::abs(grid[i])))
      throw Error(ErrorKind::InvalidInput, "grid is not uniform at index " + std::to_string(i));
  }
  std::vector<double> d(n);
  d[0] = (series[1] - series[0]) / h;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (series[i + 1] - series[i - 1]) / (2.0 * h);
  d[n - 1] = (series[n - 1] - series[n - 2]) / h;
  return d;
}

std::vector<double> derivative(const SweepResult& sw) {
  const auto g = sw.grid();
  const auto e = sw.etas();
  return derivative(g, e);
}

std::pair<double, double> one_sided_slopes(const ModelSpec& model, const std::string& axis, double x0, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "slope step must be positive");
  require_axis(model, axis);
  const double mid = eta_at(model, axis, x0);
  return {(mid - eta_at(model, axis, x0 - h)) / h, (eta_at(model, axis, x0 + h) - mid) / h};
}

std::string_view to_string(JumpKind kind) noexcept { return kind == JumpKind::Eta ? "eta" : "deta"; }

namespace {

double median(std::vector<double>& v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  const double upper = v[m];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lower + upper);
}

}  // namespace

DiscontinuityReport detect_discontinuities(std::span<const double> series, std::span<const double> grid,
                                           const Detector& detector, JumpKind kind) {
  if (series.size() != grid.size())
    throw Error(ErrorKind::InvalidInput, "series and grid differ in length");
  if (detector.w < 1) throw Error(ErrorKind::InvalidInput, "detector window must be >= 1");
  const std::size_t w = static_cast<std::size_t>(detector.w);
  if (series.size() < 2 * w + 2)
    throw Error(ErrorKind::InvalidInput, "series of length " + std::to_string(series.size()) +
                                             " is too short for window " + std::to_string(w) + " (needs " +
                                             std::to_string(2 * w + 2) + ")");

  const std::size_t m = series.size() - 1;  // number of intervals
  std::vector<double> jump(m);
  for (std::size_t i = 0; i < m; ++i) jump[i] = std::abs(series[i + 1] - series[i]);

  std::vector<bool> flagged(m, false);
  std::vector<double> neighbours;
  for (std::size_t i = 0; i < m; ++i) {
    neighbours.clear();
    const std::size_t lo = i >= w ? i - w : 0;
    const std::size_t hi = std::min(m - 1, i + w);
    for (std::size_t j = lo; j <= hi; ++j)
      if (j != i) neighbours.push_back(jump[j]);
    const double threshold = std::max(detector.floor, detector.kappa * median(neighbours));
    flagged[i] = jump[i] > threshold;
  }

  DiscontinuityReport report{kind, {}, detector};
  for (std::size_t i = 0; i < m;) {
    if (!flagged[i]) {
      ++i;
      continue;
    }
    std::size_t best = i;
    for (; i < m && flagged[i]; ++i)
      if (jump[i] > jump[best]) best = i;
    report.locations.push_back({grid[best], grid[best + 1], jump[best], best});
  }
  return report;
}

Detector DetectorSettings::deta_detector(std::span<const double> deta) const {
  double peak = 0.0;
  for (double d : deta) peak = std::max(peak, std::abs(d));
  return {w, deta_kappa, deta_floor.value_or(1e-2 * peak)};
}

SweepReports annotate(SweepResult& sw, const DetectorSettings& settings) {
  const auto g = sw.grid();
  const auto e = sw.etas();
  SweepReports r{detect_discontinuities(e, g, settings.eta_detector(), JumpKind::Eta),
                 detect_discontinuities(sw.deta, g, settings.deta_detector(sw.deta), JumpKind::Deta)};
  for (auto& s : sw.samples) s.flags = 0;
  for (const auto& loc : r.eta.locations) sw.samples[loc.interval].flags |= static_cast<unsigned>(SampleFlag::EtaJump);
  for (const auto& loc : r.deta.locations)
    sw.samples[loc.interval].flags |= static_cast<unsigned>(SampleFlag::DetaJump);
  return r;
}

std::size_t argmax_eta(const SweepResult& sw) {
  if (sw.samples.empty()) throw Error(ErrorKind::InvalidInput, "empty sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sw.samples.size(); ++i)
    if (sw.samples[i].eta > sw.samples[best].eta) best = i;
  return best;
}

std::size_t argmin_eta(const SweepResult& sw) {
  if (sw.samples.empty()) throw Error(ErrorKind::InvalidInput, "empty sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sw.samples.size(); ++i)
    if (sw.samples[i].eta < sw.samples[best].eta) best = i;
  return best;
}

std::size_t nearest_index(std::span<const double> grid, double x) {
  if (grid.empty()) throw Error(ErrorKind::InvalidInput, "empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - x) < std::abs(grid[best] - x)) best = i;
  return best;
}

}  // namespace nhscope
