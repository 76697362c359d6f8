#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nhscope/models.hpp"
#include "nhscope/petermann.hpp"
#include "nhscope/spectral.hpp"

using namespace nhscope;

namespace {

double hermiticity_defect(const Eigen::MatrixXcd& H) { return (H - H.adjoint()).norm(); }

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("ssh with g = 0 is the Hermitian SSH chain") {
    const auto h = build_nonreciprocal_ssh(1, 1, 0, 2, Boundary::Open);
    CHECK(h.dim() == 4);
    CHECK(hermiticity_defect(h.matrix) == 0.0);
    Eigen::MatrixXcd expected(4, 4);
    expected << 0, 1, 0, 0,
                1, 0, 1, 0,
                0, 1, 0, 1,
                0, 0, 1, 0;
    CHECK(h.matrix == expected);
  }

  TEST_CASE("ssh intercell hopping is t2+g from B_n to A_{n+1} and t2-g back") {
    const auto h = build_nonreciprocal_ssh(0.5, 1, 0.1, 3, Boundary::Open);
    CHECK(h.dim() == 6);
    // B_1 = index 1, A_2 = index 2.
    CHECK(h.matrix(1, 2).real() == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(h.matrix(2, 1).real() == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(h.matrix(3, 4).real() == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(h.matrix(0, 1) == Complex(0.5));
    CHECK(h.matrix(1, 0) == Complex(0.5));
    CHECK(h.matrix(5, 0) == Complex(0.0));
    CHECK(h.labels[3] == SiteLabel{2, 1});
  }

  TEST_CASE("ssh Hermiticity defect is 2|g|sqrt2 for two cells") {
    const auto h = build_nonreciprocal_ssh(0.5, 1, 0.1, 2, Boundary::Open);
    CHECK(hermiticity_defect(h.matrix) == doctest::Approx(2 * 0.1 * std::sqrt(2.0)).epsilon(1e-14));
  }

  TEST_CASE("periodic ssh adds the wraparound pair") {
    const auto h = build_nonreciprocal_ssh(0.5, 1, 0.1, 3, Boundary::Periodic);
    CHECK(h.matrix(5, 0).real() == doctest::Approx(1.1));
    CHECK(h.matrix(0, 5).real() == doctest::Approx(0.9));
  }

  TEST_CASE("ssh rejects bad specs") {
    CHECK_THROWS_AS(build_nonreciprocal_ssh(0.5, 1, 0.1, 1, Boundary::Open), Error);
    CHECK_THROWS_AS(build_nonreciprocal_ssh(NAN, 1, 0.1, 3, Boundary::Open), Error);
    try {
      build_nonreciprocal_ssh(0.5, INFINITY, 0.1, 3, Boundary::Open);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
  }

  TEST_CASE("two-level matrix") {
    const auto h1 = build_two_level(1);
    CHECK(hermiticity_defect(h1.matrix) == 0.0);
    const auto es1 = eig_right(h1);
    CHECK(es1.eigenvalues(0).real() == doctest::Approx(-1));
    CHECK(es1.eigenvalues(1).real() == doctest::Approx(1));

    const auto h0 = build_two_level(0);
    CHECK(h0.matrix(0, 1) == Complex(0));
    CHECK(h0.matrix(1, 0) == Complex(1));

    const auto es4 = eig_right(build_two_level(4));
    CHECK(es4.eigenvalues(0).real() == doctest::Approx(-2));
    CHECK(es4.eigenvalues(1).real() == doctest::Approx(2));
    // eigenvectors proportional to (-2, 1) and (2, 1)
    CHECK(std::abs(es4.right(0, 0) / es4.right(1, 0) - Complex(-2)) < 1e-12);
    CHECK(std::abs(es4.right(0, 1) / es4.right(1, 1) - Complex(2)) < 1e-12);
    CHECK_THROWS_AS(build_two_level(NAN), Error);
  }

  TEST_CASE("quasicrystal without potential is circulant") {
    const auto h = build_quasicrystal(1, 0.5, 0, 239, 169, 169, Boundary::Periodic);
    CHECK(h.matrix.diagonal().cwiseAbs().maxCoeff() == 0.0);
    const Eigen::Index n = h.dim();
    for (Eigen::Index i = 1; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) REQUIRE(h.matrix(i, j) == h.matrix(i - 1, (j + n - 1) % n));
    CHECK(h.matrix(1, 0) == Complex(1));    // JR below the diagonal
    CHECK(h.matrix(0, 1) == Complex(0.5));  // JL above
  }

  TEST_CASE("quasicrystal potential phase is exact at integer multiples") {
    const auto h = build_quasicrystal(1, 0.5, 1, 239, 169, 169, Boundary::Periodic);
    CHECK(h.matrix(168, 168) == Complex(1.0, 0.0));
    const double phase = -2 * std::numbers::pi * (239.0 / 169.0);
    CHECK(std::abs(h.matrix(0, 0) - std::polar(1.0, phase)) < 1e-12);
  }

  TEST_CASE("quasicrystal rejects negative V and non-reduced alpha") {
    CHECK_THROWS_AS(build_quasicrystal(1, 0.5, -0.1, 239, 169, 169, Boundary::Periodic), Error);
    CHECK_THROWS_AS(build_quasicrystal(1, 0.5, 0.5, 2, 4, 10, Boundary::Periodic), Error);
    CHECK_THROWS_AS(build_quasicrystal(1, 0.5, 0.5, -1, 4, 10, Boundary::Periodic), Error);
  }

  TEST_CASE("pt bloch matrix") {
    const auto h = build_pt_ssh_bloch(0.5, 0.8, 0.7, 0);
    CHECK(std::abs(h.matrix(0, 0) - Complex(0, 0.5)) < 1e-15);
    CHECK(std::abs(h.matrix(0, 1) - Complex(1.5)) < 1e-15);
    CHECK(std::abs(h.matrix(1, 0) - Complex(1.5)) < 1e-15);
    CHECK(std::abs(h.matrix(1, 1) - Complex(0, -0.5)) < 1e-15);

    const auto hp = build_pt_ssh_bloch(0.5, 0.8, 0.7, std::numbers::pi);
    CHECK(std::abs(hp.matrix(0, 1) - Complex(0.1)) < 1e-15);
    CHECK(std::abs(hp.matrix(1, 0) - Complex(0.1)) < 1e-15);
  }

  TEST_CASE("pt symmetry sigma_x H sigma_x = conj(H) on random parameters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> par(-2, 2), mom(-std::numbers::pi, std::numbers::pi);
    Eigen::Matrix2cd sx;
    sx << 0, 1, 1, 0;
    for (int i = 0; i < 1000; ++i) {
      const auto h = build_pt_ssh_bloch(par(rng), par(rng), par(rng), mom(rng));
      const Eigen::MatrixXcd lhs = sx * h.matrix * sx;
      REQUIRE(lhs == h.matrix.conjugate());
    }
  }

  TEST_CASE("sturm-liouville chain follows the operator's term placement") {
    const auto h1 = build_sturm_liouville_chain(1, 1, 2, Boundary::Open);
    CHECK(hermiticity_defect(h1.matrix) == 0.0);

    // (1/g) b^dag a puts 1/g at (B, A); g a^dag b puts g at (A, B).
    const auto h2 = build_sturm_liouville_chain(1, 2, 2, Boundary::Open);
    CHECK(h2.matrix(1, 0) == Complex(0.5));
    CHECK(h2.matrix(0, 1) == Complex(2.0));
    CHECK(h2.matrix(1, 2) == Complex(0.5));
    CHECK(h2.matrix(2, 1) == Complex(2.0));
    CHECK(h2.matrix(2, 3) == Complex(2.0));
    CHECK(h2.matrix(3, 2) == Complex(2.0));
    CHECK(h2.matrix(5, 0) == Complex(0.0));  // open chain ends on C

    const auto es = eig_right(build_sturm_liouville_chain(1, 1.5, 50, Boundary::Open));
    CHECK(spectrum_summary(es, 1e-10).is_real);
    CHECK_THROWS_AS(build_sturm_liouville_chain(1, 0, 2, Boundary::Open), Error);
  }

  TEST_CASE("Hermitian points of every model") {
    CHECK(hermiticity_defect(build(with_param(default_spec(ModelVariant::NonReciprocalSSH), "g", 0)).matrix) == 0);
    CHECK(hermiticity_defect(build(with_param(default_spec(ModelVariant::TwoLevel), "gamma", 1)).matrix) == 0);
    CHECK(hermiticity_defect(build(with_param(default_spec(ModelVariant::SturmLiouvilleChain), "g", 1)).matrix) == 0);
  }

  TEST_CASE("rebuilding from the same spec is bit-identical") {
    for (auto v : {ModelVariant::NonReciprocalSSH, ModelVariant::TwoLevel, ModelVariant::Quasicrystal,
                   ModelVariant::PTSSHBloch, ModelVariant::SturmLiouvilleChain}) {
      const auto spec = default_spec(v);
      const auto a = build(spec), b = build(spec);
      CHECK(a.matrix == b.matrix);
      CHECK(a.labels == b.labels);
      CHECK(a.spec == spec);
    }
  }

  TEST_CASE("with_param rejects unknown names") {
    CHECK_THROWS_AS(with_param(default_spec(ModelVariant::TwoLevel), "t1", 1), Error);
  }

  TEST_CASE("variant and boundary names") {
    CHECK(parse_variant("ssh") == ModelVariant::NonReciprocalSSH);
    CHECK(parse_variant("two-level") == ModelVariant::TwoLevel);
    CHECK(parse_variant("pt-ssh") == ModelVariant::PTSSHBloch);
    CHECK(parse_variant("sl") == ModelVariant::SturmLiouvilleChain);
    CHECK_FALSE(parse_variant("nope"));
    CHECK(parse_boundary("pbc") == Boundary::Periodic);
    CHECK(parse_variant(to_string(ModelVariant::Quasicrystal)) == ModelVariant::Quasicrystal);
  }

  TEST_CASE("complex token parsing") {
    CHECK(parse_complex("1") == Complex(1, 0));
    CHECK(parse_complex("-2i") == Complex(0, -2));
    CHECK(parse_complex("0.5-0.1i") == Complex(0.5, -0.1));
    CHECK(parse_complex("1e-3+2e+2i") == Complex(1e-3, 200));
    CHECK(parse_complex("i") == Complex(0, 1));
    CHECK(parse_complex("-i") == Complex(0, -1));
    CHECK(parse_complex("3j") == Complex(0, 3));
    CHECK_FALSE(parse_complex("abc"));
    CHECK_FALSE(parse_complex("1+"));
    CHECK_FALSE(parse_complex(""));
    for (Complex z : {Complex(0.1, -3e-17), Complex(-2, 0), Complex(0, 1e300)})
      CHECK(parse_complex(format_complex(z)) == z);
  }

  TEST_CASE("matrix file ingestion") {
    std::istringstream id("# identity\ndim 2\n1 0\n0 1\n");
    const auto h = read_hamiltonian(id, "id.txt");
    CHECK(h.matrix == Eigen::MatrixXcd::Identity(2, 2));
    CHECK(h.labels.size() == 2);
    CHECK_FALSE(h.spec);

    std::istringstream ep("dim 2\n0 0\n1 0\n");
    const auto hep = read_hamiltonian(ep);
    CHECK(eta(eig_right(hep)) == doctest::Approx(1.0).epsilon(1e-7));

    auto ingestion_error = [](const std::string& text) -> std::string {
      std::istringstream in(text);
      try {
        read_hamiltonian(in, "m.txt");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Ingestion);
        return e.what();
      }
      FAIL("expected an ingestion error");
      return {};
    };
    CHECK(ingestion_error("dim 2\n1 0 0\n0 1\n").find("m.txt:2") != std::string::npos);
    CHECK(ingestion_error("dim 2\n1 0\n").find("non-square") != std::string::npos);
    CHECK(ingestion_error("dim 2\n1 0\n0 x\n").find("m.txt:3") != std::string::npos);
    CHECK(ingestion_error("dim 2\n1 0\n0 nan\n").find("m.txt:3") != std::string::npos);
    CHECK(ingestion_error("2\n1 0\n0 1\n").find("m.txt:1") != std::string::npos);
  }

  TEST_CASE("matrix file round trip") {
    const auto h = build_pt_ssh_bloch(0.5, 0.8, 0.7, 1.234);
    std::stringstream s;
    write_hamiltonian(s, h.matrix);
    CHECK(read_hamiltonian(s).matrix == h.matrix);
  }
}
