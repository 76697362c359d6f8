#include "nhscope/models.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "nhscope/error.hpp"

namespace nhscope {

namespace {

[[noreturn]] void invalid_spec(const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); }

void require_finite(std::initializer_list<std::pair<const char*, double>> params) {
  for (const auto& [name, value] : params) {
    if (!std::isfinite(value)) invalid_spec(std::string("parameter ") + name + " is not finite");
  }
}

void require_size(int n, const char* what) {
  if (n < 2) invalid_spec(std::string(what) + " must be >= 2, got " + std::to_string(n));
}

std::vector<SiteLabel> lattice_labels(int cells, int per_cell) {
  std::vector<SiteLabel> labels;
  labels.reserve(static_cast<std::size_t>(cells) * per_cell);
  for (int n = 1; n <= cells; ++n)
    for (int s = 0; s < per_cell; ++s) labels.push_back({n, s});
  return labels;
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "invalid-spec";
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::PairingFailure: return "pairing-failure";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InternalConsistency: return "internal-consistency";
    case ErrorKind::InvalidRegime: return "invalid-regime";
    case ErrorKind::NoEdgeModes: return "no-edge-modes";
    case ErrorKind::AmbiguousModes: return "ambiguous-modes";
    case ErrorKind::Structure: return "structure";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

std::string_view to_string(ModelVariant v) noexcept {
  switch (v) {
    case ModelVariant::NonReciprocalSSH: return "nonreciprocal_ssh";
    case ModelVariant::TwoLevel: return "two_level";
    case ModelVariant::Quasicrystal: return "quasicrystal";
    case ModelVariant::PTSSHBloch: return "pt_ssh_bloch";
    case ModelVariant::SturmLiouvilleChain: return "sturm_liouville";
    case ModelVariant::External: return "external";
  }
  return "unknown";
}

std::string_view to_string(Boundary b) noexcept { return b == Boundary::Open ? "open" : "periodic"; }

std::optional<ModelVariant> parse_variant(std::string_view name) {
  static const std::map<std::string, ModelVariant, std::less<>> table = {
      {"ssh", ModelVariant::NonReciprocalSSH},
      {"nonreciprocal_ssh", ModelVariant::NonReciprocalSSH},
      {"nonreciprocal-ssh", ModelVariant::NonReciprocalSSH},
      {"two_level", ModelVariant::TwoLevel},
      {"two-level", ModelVariant::TwoLevel},
      {"quasicrystal", ModelVariant::Quasicrystal},
      {"pt_ssh_bloch", ModelVariant::PTSSHBloch},
      {"pt-ssh", ModelVariant::PTSSHBloch},
      {"pt_ssh", ModelVariant::PTSSHBloch},
      {"sturm_liouville", ModelVariant::SturmLiouvilleChain},
      {"sturm-liouville", ModelVariant::SturmLiouvilleChain},
      {"sl", ModelVariant::SturmLiouvilleChain},
      {"external", ModelVariant::External},
  };
  if (auto it = table.find(name); it != table.end()) return it->second;
  return std::nullopt;
}

std::optional<Boundary> parse_boundary(std::string_view name) {
  if (name == "open" || name == "obc") return Boundary::Open;
  if (name == "periodic" || name == "pbc") return Boundary::Periodic;
  return std::nullopt;
}

double ModelSpec::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end())
    invalid_spec("model " + std::string(to_string(variant)) + " is missing parameter '" + name + "'");
  return it->second;
}

const std::vector<std::string>& parameter_names(ModelVariant v) {
  static const std::vector<std::string> ssh = {"t1", "t2", "g"};
  static const std::vector<std::string> two = {"gamma"};
  static const std::vector<std::string> qc = {"JR", "JL", "V", "alpha_num", "alpha_den"};
  static const std::vector<std::string> pt = {"u", "v", "w", "k"};
  static const std::vector<std::string> sl = {"t0", "g"};
  static const std::vector<std::string> none;
  switch (v) {
    case ModelVariant::NonReciprocalSSH: return ssh;
    case ModelVariant::TwoLevel: return two;
    case ModelVariant::Quasicrystal: return qc;
    case ModelVariant::PTSSHBloch: return pt;
    case ModelVariant::SturmLiouvilleChain: return sl;
    case ModelVariant::External: return none;
  }
  return none;
}

ModelSpec default_spec(ModelVariant v) {
  ModelSpec s;
  s.variant = v;
  switch (v) {
    case ModelVariant::NonReciprocalSSH:
      s.params = {{"t1", 0.5}, {"t2", 1.0}, {"g", 0.1}};
      s.size = 150;
      s.boundary = Boundary::Open;
      break;
    case ModelVariant::TwoLevel:
      s.params = {{"gamma", 1.0}};
      break;
    case ModelVariant::Quasicrystal:
      s.params = {{"JR", 1.0}, {"JL", 0.5}, {"V", 0.5}, {"alpha_num", 239}, {"alpha_den", 169}};
      s.size = 169;
      s.boundary = Boundary::Periodic;
      break;
    case ModelVariant::PTSSHBloch:
      s.params = {{"u", 0.5}, {"v", 0.8}, {"w", 0.7}, {"k", 0.0}};
      break;
    case ModelVariant::SturmLiouvilleChain:
      s.params = {{"t0", 1.0}, {"g", 1.5}};
      s.size = 50;
      s.boundary = Boundary::Open;
      break;
    case ModelVariant::External:
      break;
  }
  return s;
}

ModelSpec with_param(ModelSpec spec, const std::string& name, double value) {
  const auto& names = parameter_names(spec.variant);
  if (std::find(names.begin(), names.end(), name) == names.end())
    invalid_spec("model " + std::string(to_string(spec.variant)) + " has no parameter '" + name + "'");
  spec.params[name] = value;
  return spec;
}

Hamiltonian build_nonreciprocal_ssh(double t1, double t2, double g, int cells, Boundary boundary) {
  require_finite({{"t1", t1}, {"t2", t2}, {"g", g}});
  require_size(cells, "cells");

  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(cells);
  Hamiltonian h;
  h.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  auto A = [](int n) { return Eigen::Index(2 * n); };
  auto B = [](int n) { return Eigen::Index(2 * n + 1); };
  for (int n = 0; n < cells; ++n) {
    h.matrix(A(n), B(n)) = t1;
    h.matrix(B(n), A(n)) = t1;
    const bool last = n + 1 == cells;
    if (last && boundary == Boundary::Open) continue;
    const int next = last ? 0 : n + 1;
    h.matrix(B(n), A(next)) += t2 + g;
    h.matrix(A(next), B(n)) += t2 - g;
  }
  h.labels = lattice_labels(cells, 2);
  h.spec = ModelSpec{ModelVariant::NonReciprocalSSH, {{"t1", t1}, {"t2", t2}, {"g", g}}, cells, boundary};
  return h;
}

Hamiltonian build_two_level(double gamma) {
  require_finite({{"gamma", gamma}});
  Hamiltonian h;
  h.matrix = Eigen::MatrixXcd::Zero(2, 2);
  h.matrix(0, 1) = gamma;
  h.matrix(1, 0) = 1.0;
  h.labels = {{1, 0}, {1, 1}};
  h.spec = ModelSpec{ModelVariant::TwoLevel, {{"gamma", gamma}}, std::nullopt, std::nullopt};
  return h;
}

Hamiltonian build_quasicrystal(double JR, double JL, double V, std::int64_t alpha_num,
                               std::int64_t alpha_den, int sites, Boundary boundary) {
  require_finite({{"JR", JR}, {"JL", JL}, {"V", V}});
  require_size(sites, "sites");
  if (V < 0.0) invalid_spec("potential strength V must be non-negative, got " + std::to_string(V));
  if (alpha_num <= 0 || alpha_den <= 0 || std::gcd(alpha_num, alpha_den) != 1)
    invalid_spec("alpha must be a reduced fraction of positive integers, got " +
                 std::to_string(alpha_num) + "/" + std::to_string(alpha_den));

  Hamiltonian h;
  h.matrix = Eigen::MatrixXcd::Zero(sites, sites);
  for (int i = 0; i < sites; ++i) {
    const std::int64_t n = i + 1;
    // exp(-2 pi i p n / q) depends only on p n mod q; reducing first keeps the phase exact.
    const double frac = static_cast<double>((alpha_num % alpha_den) * (n % alpha_den) % alpha_den) /
                        static_cast<double>(alpha_den);
    const double phase = -2.0 * std::numbers::pi * frac;
    h.matrix(i, i) = V * Complex(std::cos(phase), std::sin(phase));
    const bool last = i + 1 == sites;
    if (last && boundary == Boundary::Open) continue;
    const int next = last ? 0 : i + 1;
    h.matrix(next, i) += JR;
    h.matrix(i, next) += JL;
  }
  h.labels = lattice_labels(sites, 1);
  h.spec = ModelSpec{ModelVariant::Quasicrystal,
                     {{"JR", JR},
                      {"JL", JL},
                      {"V", V},
                      {"alpha_num", static_cast<double>(alpha_num)},
                      {"alpha_den", static_cast<double>(alpha_den)}},
                     sites,
                     boundary};
  return h;
}

Hamiltonian build_pt_ssh_bloch(double u, double v, double w, double k) {
  require_finite({{"u", u}, {"v", v}, {"w", w}, {"k", k}});
  const Complex I(0.0, 1.0);
  Hamiltonian h;
  h.matrix.resize(2, 2);
  h.matrix(0, 0) = I * u;
  h.matrix(0, 1) = w * std::exp(-I * k) + v;
  h.matrix(1, 0) = w * std::exp(I * k) + v;
  h.matrix(1, 1) = -I * u;
  h.labels = {{0, 0}, {0, 1}};
  h.spec = ModelSpec{ModelVariant::PTSSHBloch, {{"u", u}, {"v", v}, {"w", w}, {"k", k}}, std::nullopt,
                     std::nullopt};
  return h;
}

Hamiltonian build_sturm_liouville_chain(double t0, double g, int cells, Boundary boundary) {
  require_finite({{"t0", t0}, {"g", g}});
  require_size(cells, "cells");
  if (g == 0.0) invalid_spec("g must be non-zero");

  const Eigen::Index dim = 3 * static_cast<Eigen::Index>(cells);
  Hamiltonian h;
  h.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 0; n < cells; ++n) {
    const Eigen::Index a = 3 * n, b = a + 1, c = a + 2;
    h.matrix(b, a) = t0 / g;
    h.matrix(a, b) = t0 * g;
    h.matrix(b, c) = t0 / g;
    h.matrix(c, b) = t0 * g;
    const bool last = n + 1 == cells;
    if (last && boundary == Boundary::Open) continue;
    const Eigen::Index a_next = last ? 0 : a + 3;
    h.matrix(a_next, c) += t0 * g;
    h.matrix(c, a_next) += t0 * g;
  }
  h.labels = lattice_labels(cells, 3);
  h.spec = ModelSpec{ModelVariant::SturmLiouvilleChain, {{"t0", t0}, {"g", g}}, cells, boundary};
  return h;
}

namespace {

int required_size(const ModelSpec& spec) {
  if (!spec.size) invalid_spec("model " + std::string(to_string(spec.variant)) + " requires a size");
  return *spec.size;
}

std::int64_t integral_param(const ModelSpec& spec, const std::string& name) {
  const double x = spec.param(name);
  if (!std::isfinite(x) || x != std::round(x)) invalid_spec("parameter " + name + " must be an integer");
  return static_cast<std::int64_t>(x);
}

}  // namespace

Hamiltonian build(const ModelSpec& spec) {
  const Boundary bc = spec.boundary.value_or(Boundary::Open);
  switch (spec.variant) {
    case ModelVariant::NonReciprocalSSH:
      return build_nonreciprocal_ssh(spec.param("t1"), spec.param("t2"), spec.param("g"), required_size(spec), bc);
    case ModelVariant::TwoLevel:
      return build_two_level(spec.param("gamma"));
    case ModelVariant::Quasicrystal:
      return build_quasicrystal(spec.param("JR"), spec.param("JL"), spec.param("V"),
                                integral_param(spec, "alpha_num"), integral_param(spec, "alpha_den"),
                                required_size(spec), spec.boundary.value_or(Boundary::Periodic));
    case ModelVariant::PTSSHBloch:
      return build_pt_ssh_bloch(spec.param("u"), spec.param("v"), spec.param("w"), spec.param("k"));
    case ModelVariant::SturmLiouvilleChain:
      return build_sturm_liouville_chain(spec.param("t0"), spec.param("g"), required_size(spec), bc);
    case ModelVariant::External:
      break;
  }
  invalid_spec("external models are loaded from file, not built");
}

// ---------------------------------------------------------------------------
// Matrix text format
// ---------------------------------------------------------------------------

namespace {

std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(buf, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != buf.size()) return std::nullopt;
  return value;
}

}  // namespace

std::optional<Complex> parse_complex(std::string_view token) {
  if (token.empty()) return std::nullopt;
  const char last = token.back();
  if (last != 'i' && last != 'j') {
    auto re = parse_real(token);
    if (!re) return std::nullopt;
    return Complex(*re, 0.0);
  }
  std::string_view body = token.substr(0, token.size() - 1);
  // Split at the last sign that is not the leading one and not part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto imag_part = [](std::string_view s) -> std::optional<double> {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s);
  };
  if (split == std::string_view::npos) {
    auto im = imag_part(body);
    if (!im) return std::nullopt;
    return Complex(0.0, *im);
  }
  auto re = parse_real(body.substr(0, split));
  auto im = imag_part(body.substr(split));
  if (!re || !im) return std::nullopt;
  return Complex(*re, *im);
}

std::string format_complex(Complex z) {
  std::ostringstream os;
  os << std::setprecision(17);
  if (z.imag() == 0.0) {
    os << z.real();
  } else if (z.real() == 0.0) {
    os << z.imag() << 'i';
  } else {
    os << z.real() << (std::signbit(z.imag()) ? "" : "+") << z.imag() << 'i';
  }
  return os.str();
}

Hamiltonian read_hamiltonian(std::istream& in, const std::string& source_name) {
  auto fail = [&](int line, const std::string& msg) -> void {
    throw Error(ErrorKind::Ingestion, source_name + ":" + std::to_string(line) + ": " + msg);
  };

  std::string line;
  int lineno = 0;
  std::optional<Eigen::Index> dim;
  Eigen::MatrixXcd m;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    if (!dim) {
      std::string key;
      long long n = 0;
      fields >> key >> n;
      std::string extra;
      if (key != "dim" || fields.fail() || (fields >> extra) || n < 1) fail(lineno, "expected header 'dim <N>'");
      dim = static_cast<Eigen::Index>(n);
      m = Eigen::MatrixXcd::Zero(*dim, *dim);
      continue;
    }
    if (row >= *dim) fail(lineno, "non-square matrix: more than " + std::to_string(*dim) + " rows");
    std::vector<Complex> entries;
    std::string tok;
    while (fields >> tok) {
      auto z = parse_complex(tok);
      if (!z) fail(lineno, "cannot parse complex entry '" + tok + "'");
      if (!std::isfinite(z->real()) || !std::isfinite(z->imag())) fail(lineno, "non-finite entry '" + tok + "'");
      entries.push_back(*z);
    }
    if (static_cast<Eigen::Index>(entries.size()) != *dim)
      fail(lineno, "non-square matrix: row has " + std::to_string(entries.size()) + " entries, expected " +
                       std::to_string(*dim));
    for (Eigen::Index j = 0; j < *dim; ++j) m(row, j) = entries[static_cast<std::size_t>(j)];
    ++row;
  }
  if (!dim) fail(lineno, "missing 'dim <N>' header");
  if (row != *dim)
    fail(lineno, "non-square matrix: found " + std::to_string(row) + " rows, expected " + std::to_string(*dim));

  Hamiltonian h;
  h.matrix = std::move(m);
  h.labels = lattice_labels(static_cast<int>(*dim), 1);
  return h;
}

Hamiltonian load_hamiltonian(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Ingestion, "cannot open matrix file " + path.string());
  return read_hamiltonian(in, path.string());
}

void write_hamiltonian(std::ostream& out, const Eigen::MatrixXcd& matrix) {
  out << "dim " << matrix.rows() << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) out << ' ';
      out << format_complex(matrix(i, j));
    }
    out << '\n';
  }
}

}  // namespace nhscope
