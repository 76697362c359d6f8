#include <cmath>
#include <numbers>
#include <random>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "nhscope/analysis.hpp"

using namespace nhscope;

namespace {

EigenSystem open_chain(double t1, double g, int cells) {
  return eig_right(build_nonreciprocal_ssh(t1, 1.0, g, cells, Boundary::Open));
}

// Sine of the largest principal angle between span(A) and span(B).
double subspace_sin(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  const Eigen::MatrixXcd QA = Eigen::HouseholderQR<Eigen::MatrixXcd>(A).householderQ() *
                              Eigen::MatrixXcd::Identity(A.rows(), A.cols());
  const Eigen::MatrixXcd QB = Eigen::HouseholderQR<Eigen::MatrixXcd>(B).householderQ() *
                              Eigen::MatrixXcd::Identity(B.rows(), B.cols());
  const Eigen::MatrixXcd P = QB - QA * (QA.adjoint() * QB);
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(P).singularValues()(0);
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("zero modes deep in the topological phase sit on opposite ends") {
    const auto pair = extract_zero_modes(open_chain(0.133, 0.1, 150));
    CHECK(pair.overlap < 0.1);
    CHECK(pair.left_localized(0));
    CHECK(pair.right_localized(1));
    CHECK(std::abs(pair.energies[0]) < 1e-6);
    CHECK(std::abs(pair.energies[1]) < 1e-6);
  }

  TEST_CASE("zero modes past the transition share one end") {
    const auto pair = extract_zero_modes(open_chain(0.75, 0.1, 150));
    CHECK(pair.overlap > 0.9);
    CHECK(pair.left_localized(0));
    CHECK(pair.left_localized(1));
  }

  TEST_CASE("no zero modes in the trivial phase") {
    try {
      extract_zero_modes(open_chain(1.4, 0.1, 150));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoEdgeModes);
    }
  }

  TEST_CASE("more than two zero modes is ambiguous") {
    const auto es = eig_right(Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(4, 4)));
    try {
      extract_zero_modes(es, 1e-6);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::AmbiguousModes);
    }
  }

  TEST_CASE("analytic edge-state ratios") {
    const auto a = analytic_edge_states(0.5, 1.0, 0.1, 150);
    CHECK(a.a_ratio == doctest::Approx(-0.5 / 1.1).epsilon(1e-14));
    CHECK(a.b_ratio == doctest::Approx(-0.5 / 0.9).epsilon(1e-14));
    CHECK_FALSE(a.a_vanished);
    CHECK_FALSE(a.b_vanished);
    CHECK_FALSE(a.critical);
    CHECK(std::abs(a.a_mode.norm() - 1) < 1e-12);
    CHECK(std::norm(a.a_mode(0)) > 0.5);

    CHECK(analytic_edge_states(0.9, 1.0, 0.1, 150).critical);
    const auto past = analytic_edge_states(1.0, 1.0, 0.1, 150);
    CHECK(past.b_vanished);
    CHECK_FALSE(past.a_vanished);
    CHECK(past.b_mode.norm() == 0.0);
  }

  TEST_CASE("analytic edge-state argument errors") {
    try {
      analytic_edge_states(0.5, 1.0, 1.0, 10);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidRegime);
    }
    try {
      analytic_edge_states(0.0, 1.0, 0.1, 10);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidInput);
    }
  }

  TEST_CASE("analytic modes span the numerical zero-mode subspace") {
    for (double t1 : {0.1, 0.3, 0.5}) {
      const auto pair = extract_zero_modes(open_chain(t1, 0.1, 150));
      const auto an = analytic_edge_states(t1, 1.0, 0.1, 150);
      Eigen::MatrixXcd num(pair.stateL.size(), 2), ana(pair.stateL.size(), 2);
      num << pair.stateL, pair.stateR;
      ana << an.a_mode, an.b_mode;
      CHECK(subspace_sin(ana, num) < 1e-3);
    }
  }

  TEST_CASE("Hermitian chain keeps its edge modes apart") {
    const auto grid = uniform_grid(0.05, 0.9, 10);
    for (const auto& p : edge_transition_scan(1.0, 0.0, 150, grid)) CHECK(p.overlap < 0.1);
  }

  TEST_CASE("overlap transition ignores isolated spikes") {
    std::vector<EdgeScanPoint> scan;
    for (double o : {0.0, 0.0, 0.9, 0.0, 0.1, 0.8, 0.95, 1.0}) scan.push_back({0, o, 0});
    CHECK(overlap_transition(scan) == std::optional<std::size_t>(5));
    scan.back().overlap = 0.2;
    CHECK_FALSE(overlap_transition(scan).has_value());
  }

  TEST_CASE("effective Bloch Hamiltonian") {
    const auto h0 = eig_right(effective_bloch(0.5, 1.0, 0.1, 0.0));
    const double e0 = 0.5 + std::sqrt(0.99);
    CHECK(std::abs(h0.eigenvalues(0) - Complex(-e0)) < 1e-12);
    CHECK(std::abs(h0.eigenvalues(1) - Complex(e0)) < 1e-12);
    const auto closed = eig_right(effective_bloch(std::sqrt(0.99), 1.0, 0.1, std::numbers::pi));
    CHECK(std::abs(closed.eigenvalues(0)) < 1e-7);
    // g = 0 reduces to the Hermitian SSH Bloch Hamiltonian.
    const double k = 0.7;
    const auto h = effective_bloch(0.3, 1.0, 0.0, k).matrix;
    CHECK(std::abs(h(0, 1) - (0.3 + std::exp(Complex(0, -k)))) < 1e-14);
  }

  TEST_CASE("Bloch spectrum encloses the open-chain bulk spectrum") {
    const double t1 = 0.5, g = 0.1;
    const auto es = open_chain(t1, g, 150);
    std::vector<double> bloch;
    for (int i = 0; i < 200; ++i) {
      const double k = -std::numbers::pi + 2 * std::numbers::pi * i / 199.0;
      const auto bs = eig_right(effective_bloch(t1, 1.0, g, k));
      for (Eigen::Index j = 0; j < 2; ++j) bloch.push_back(bs.eigenvalues(j).real());
    }
    std::vector<double> bulk;
    for (Eigen::Index j = 0; j < es.dim(); ++j)
      if (std::abs(es.eigenvalues(j)) > 1e-6) bulk.push_back(es.eigenvalues(j).real());
    auto dist = [](double x, const std::vector<double>& set) {
      double d = INFINITY;
      for (double y : set) d = std::min(d, std::abs(x - y));
      return d;
    };
    double hausdorff = 0.0;
    for (double x : bulk) hausdorff = std::max(hausdorff, dist(x, bloch));
    for (double y : bloch) hausdorff = std::max(hausdorff, dist(y, bulk));
    CHECK(hausdorff < 0.05);
  }

  TEST_CASE("similarity transform to the Hermitian chain") {
    CHECK(similarity_check(0.5, 1.0, 0.1, 20) < 1e-12);
    CHECK(similarity_check(0.5, 1.0, 0.0, 20) == 0.0);
    CHECK(similarity_check(0.5, 1.0, 0.1, 2) < 1e-13);
    const auto s = similarity_transform(1.0, 0.1, 3);
    CHECK(s.r == doctest::Approx(std::sqrt(0.9 / 1.1)));
    CHECK(s.diag.size() == 6);
    CHECK(s.diag(5) == doctest::Approx(s.r * s.r));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> t1(0.05, 2), gg(-0.9, 0.9);
    std::uniform_int_distribution<int> cells(2, 40);
    for (int t = 0; t < 50; ++t) REQUIRE(similarity_check(t1(rng), 1.0, gg(rng), cells(rng)) < 1e-11);
  }

  TEST_CASE("bulk biorthogonality through the Hermitian chain") {
    const auto b = bulk_biorthogonality_check(0.99, 1.0, 0.1, 150);
    CHECK(b.states == 300);
    CHECK(b.biorth_residual < 1e-8);
    CHECK(b.right_residual < 1e-10);
    CHECK(b.left_residual < 1e-10);
  }

  TEST_CASE("PT-symmetric dispersion") {
    const auto [p0, m0] = pt_dispersion(0.5, 0.8, 0.7, 0.0);
    CHECK(std::abs(p0 - Complex(std::sqrt(2.0))) < 1e-12);
    CHECK(std::abs(m0 + Complex(std::sqrt(2.0))) < 1e-12);
    const auto [pp, mp] = pt_dispersion(0.5, 0.8, 0.7, std::numbers::pi);
    CHECK(std::abs(std::abs(pp.imag()) - std::sqrt(0.24)) < 1e-12);
    CHECK(std::abs(pp.real()) < 1e-12);
    CHECK(std::abs(pp + mp) < 1e-12);

    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0, 1.5), vw(0.1, 1.5), k(-std::numbers::pi, std::numbers::pi);
    for (int t = 0; t < 200; ++t) {
      const double a = u(rng), b = vw(rng), c = vw(rng), kk = k(rng);
      const auto [ep, em] = pt_dispersion(a, b, c, kk);
      const auto es = eig_right(build_pt_ssh_bloch(a, b, c, kk));
      const auto& ev = es.eigenvalues;
      const double d = std::min(std::abs(ev(0) - ep) + std::abs(ev(1) - em), std::abs(ev(0) - em) + std::abs(ev(1) - ep));
      REQUIRE(d < 1e-7);
    }
  }

  TEST_CASE("PT exceptional momenta") {
    const auto ep = pt_ep_momenta(0.5, 0.8, 0.7);
    REQUIRE(ep);
    CHECK(ep->first == doctest::Approx(std::acos(-11.0 / 14.0)).epsilon(1e-14));
    CHECK(ep->second == doctest::Approx(-std::acos(-11.0 / 14.0)).epsilon(1e-14));
    const auto [e, _] = pt_dispersion(0.5, 0.8, 0.7, ep->first);
    CHECK(std::abs(e) < 1e-6);
    CHECK(std::abs(eta(eig_right(build_pt_ssh_bloch(0.5, 0.8, 0.7, ep->first))) - 1) < 1e-6);

    CHECK_FALSE(pt_ep_momenta(0.05, 0.8, 0.3).has_value());
    CHECK_THROWS_AS(pt_ep_momenta(0.5, 0.0, 0.7), Error);
  }

  TEST_CASE("Sturm-Liouville chain") {
    const auto herm = sturm_liouville_verify(build_sturm_liouville_chain(1.0, 1.0, 20, Boundary::Open), 1.0, 1.0);
    CHECK(herm.spectrum_real);
    CHECK(herm.completeness_residual < 1e-12);
    CHECK((herm.M.array() - 1).abs().maxCoeff() < 1e-14);

    const auto r = sturm_liouville_verify(build_sturm_liouville_chain(1.0, 1.5, 30, Boundary::Open), 1.0, 1.5);
    CHECK(r.spectrum_real);
    CHECK(r.max_imag < 1e-10);
    CHECK(r.completeness_residual < 1e-10);
    CHECK(r.eigen_residual < 1e-10);
    CHECK(r.M(0) == 1.0);
    CHECK(r.M(1) == doctest::Approx(2.25));
    CHECK((r.H0 - r.H0.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    const auto pbc = sturm_liouville_verify(build_sturm_liouville_chain(1.0, 0.7, 20, Boundary::Periodic), 1.0, 0.7);
    CHECK(pbc.spectrum_real);
  }

  TEST_CASE("Sturm-Liouville verification rejects other matrices") {
    for (const auto& H : {build_nonreciprocal_ssh(0.5, 1.0, 0.1, 3, Boundary::Open),
                          build_sturm_liouville_chain(1.0, 1.5, 5, Boundary::Open)}) {
      try {
        sturm_liouville_verify(H, 1.0, 2.0);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Structure);
      }
    }
  }

  TEST_CASE("finite-size scan on a single small chain") {
    const std::vector<int> sizes{30};
    const auto grid = uniform_grid(0.05, 0.9, 35);
    const auto pts = finite_size_scan(1.0, 0.1, sizes, grid);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].L == 30);
    CHECK(pts[0].t1_star > 0.05);
    CHECK(pts[0].t1_star < 0.9);
    CHECK(to_string(TransitionSource::EtaJump) == "eta_jump");
    CHECK(to_string(TransitionSource::OverlapCrossing) == "overlap_crossing");
  }
}
