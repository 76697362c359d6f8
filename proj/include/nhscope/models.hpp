#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nhscope {

using Complex = std::complex<double>;

enum class ModelVariant {
  NonReciprocalSSH,     // Model I
  TwoLevel,             // Model II
  Quasicrystal,         // Model III
  PTSSHBloch,           // Model IV, momentum space
  SturmLiouvilleChain,  // Model V
  External,
};

enum class Boundary { Open, Periodic };

std::string_view to_string(ModelVariant v) noexcept;
std::string_view to_string(Boundary b) noexcept;
/// Accepts the canonical names plus the CLI aliases (`ssh`, `two-level`, `pt-ssh`, `sl`, ...).
std::optional<ModelVariant> parse_variant(std::string_view name);
std::optional<Boundary> parse_boundary(std::string_view name);

/// Tagged description of one model instance.
///
/// Parameter names per variant:
///   NonReciprocalSSH     t1, t2, g
///   TwoLevel             gamma
///   Quasicrystal         JR, JL, V, alpha_num, alpha_den   (alpha is stored as an exact rational)
///   PTSSHBloch           u, v, w, k
///   SturmLiouvilleChain  t0, g
///
/// `size` counts unit cells (Models I and V) or sites (Model III); it is unset for the 2x2 models.
struct ModelSpec {
  ModelVariant variant = ModelVariant::TwoLevel;
  std::map<std::string, double> params;
  std::optional<int> size;
  std::optional<Boundary> boundary;

  double param(const std::string& name) const;
  bool operator==(const ModelSpec&) const = default;
};

/// Names of the sweepable parameters of a variant, in canonical order.
const std::vector<std::string>& parameter_names(ModelVariant v);

/// Spec with every parameter at its default value (the ones the presets start from).
ModelSpec default_spec(ModelVariant v);

/// (cell, sublattice) tag of one basis index. Sublattice 0, 1, 2 = A, B, C.
struct SiteLabel {
  int cell = 0;
  int sublattice = 0;
  bool operator==(const SiteLabel&) const = default;
};

struct Hamiltonian {
  Eigen::MatrixXcd matrix;
  std::vector<SiteLabel> labels;
  std::optional<ModelSpec> spec;  // nullopt for matrices ingested from file

  Eigen::Index dim() const noexcept { return matrix.rows(); }
};

// Basis ordering: index = 2(n-1)+s for Model I and 3(n-1)+s for Model V (cell n = 1..N, s = A, B, C).
// A term  amp * c_i^dagger c_j  contributes amp to matrix(i, j).

/// Model I: intracell t1 both ways, (t2+g) at (B_n, A_{n+1}) and (t2-g) at (A_{n+1}, B_n).
Hamiltonian build_nonreciprocal_ssh(double t1, double t2, double g, int cells, Boundary boundary);

/// Model II: [[0, gamma], [1, 0]].
Hamiltonian build_two_level(double gamma);

/// Model III: JR on the subdiagonal, JL on the superdiagonal, potential V exp(-2 pi i (p/q) n), n = 1..sites.
Hamiltonian build_quasicrystal(double JR, double JL, double V, std::int64_t alpha_num,
                               std::int64_t alpha_den, int sites, Boundary boundary);

/// Model IV: [[i u, w e^{-ik} + v], [w e^{ik} + v, -i u]].
Hamiltonian build_pt_ssh_bloch(double u, double v, double w, double k);

/// Model V: t0 * ( (1/g) b^dag a + g a^dag b + (1/g) b^dag c + g c^dag b + g a_{n+1}^dag c_n + g c_n^dag a_{n+1} ).
/// Open chains end on sublattice C of the last cell.
Hamiltonian build_sturm_liouville_chain(double t0, double g, int cells, Boundary boundary);

/// Dispatches on `spec.variant`. External specs cannot be built.
Hamiltonian build(const ModelSpec& spec);

/// Copy of `spec` with one parameter replaced; throws InvalidSpec for an unknown name.
ModelSpec with_param(ModelSpec spec, const std::string& name, double value);

// Matrix text format:
//   # comment
//   dim <N>
//   N rows of N whitespace-separated complex entries, e.g. `0.5-0.1i`, `1`, `-2i`.

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `j` for the imaginary unit).
std::optional<Complex> parse_complex(std::string_view token);
std::string format_complex(Complex z);

Hamiltonian read_hamiltonian(std::istream& in, const std::string& source_name = "<stream>");
Hamiltonian load_hamiltonian(const std::filesystem::path& path);
void write_hamiltonian(std::ostream& out, const Eigen::MatrixXcd& matrix);

}  // namespace nhscope
