#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "mlac/errors.hpp"
#include "mlac/spectral.hpp"
#include "mlac/toda.hpp"

using namespace mlac;
using std::numbers::pi;
using std::numbers::sqrt2;

namespace {
const double kBeta = 12.0 * sqrt2;

PeriodicField wavy(int n, double length = 2 * pi, double amp = 0.3) {
  return sample_curvature(ClosedCurve(length, FourierCurvature{1.0, {amp}, {}}), PeriodicGrid(n, length));
}

double sup(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_SUITE("toda") {
  TEST_CASE("matrices") {
    const TodaMatrices t2 = build_matrices(2);
    CHECK(t2.C(0, 0) == 2.0);
    CHECK(t2.C_eigenvalues[0] == doctest::Approx(2.0));
    const TodaMatrices t3 = build_matrices(3);
    CHECK(t3.C_eigenvalues[0] == doctest::Approx(1.0));
    CHECK(t3.C_eigenvalues[1] == doctest::Approx(3.0));
    for (int m : {4, 7}) {
      const TodaMatrices t = build_matrices(m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.C);
      CHECK((es.eigenvalues() - t.C_eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((t.C_sqrt * t.C_sqrt - t.C).norm() / t.C.norm() < 1e-12);
      CHECK((t.C_sqrt * t.C_inv_sqrt - Eigen::MatrixXd::Identity(m - 1, m - 1)).norm() < 1e-12);
      CHECK(std::abs(t.B.determinant()) > 0.0);
      CHECK(t.B.row(m - 1).sum() == m);
    }
    CHECK_THROWS_AS(build_matrices(1), DomainError);
  }

  TEST_CASE("h and v round trip") {
    const PeriodicGrid g(16, 1.0);
    HStack zero{g, Eigen::MatrixXd::Zero(3, 16)};
    const LayerStack v0 = v_from_h(zero);
    CHECK(sup(v0.vbar) == 0.0);
    CHECK(v0.vm.cwiseAbs().maxCoeff() == 0.0);
    HStack h{g, Eigen::MatrixXd::Random(4, 16)};
    CHECK(sup(h_from_v(v_from_h(h)).h - h.h) < 1e-12);
    HStack pair{g, Eigen::MatrixXd(2, 16)};
    pair.h.row(0).setConstant(-0.4);
    pair.h.row(1).setConstant(0.4);
    const LayerStack pv = v_from_h(pair);
    CHECK(pv.vbar(0, 3) == doctest::Approx(0.8));
    CHECK(std::abs(pv.vm[3]) < 1e-15);
  }

  TEST_CASE("layer locations") {
    const Scales s = scales_of(0.05);
    const PeriodicGrid g(16, 1.0);
    const Eigen::MatrixXd f2 = f_from_h(HStack{g, Eigen::MatrixXd::Zero(2, 16)}, s);
    CHECK(f2(0, 0) == doctest::Approx(-s.rho / 2));
    CHECK(f2(1, 0) == doctest::Approx(s.rho / 2));
    const Eigen::MatrixXd f3 = f_from_h(HStack{g, Eigen::MatrixXd::Zero(3, 16)}, s);
    CHECK(f3(0, 5) == doctest::Approx(-s.rho));
    CHECK(std::abs(f3(1, 5)) < 1e-15);
    CHECK(f3(2, 5) == doctest::Approx(s.rho));
    HStack h{g, Eigen::MatrixXd::Random(3, 16)};
    const Eigen::MatrixXd f = f_from_h(h, s);
    for (int k = 0; k < 2; ++k)
      CHECK(sup(f.row(k + 1) - f.row(k) - (Eigen::RowVectorXd::Constant(16, s.rho) + h.h.row(k + 1) - h.h.row(k))) < 1e-12);
  }

  TEST_CASE("first-order profile") {
    const PeriodicGrid g(16, 2.0);
    const PeriodicField one = PeriodicField::constant(g, 1.0);
    const LayerStack v = first_order_profile(one, 2, kBeta);
    CHECK(v.vbar(0, 0) == doctest::Approx(std::log(2.0 * kBeta) / sqrt2).epsilon(1e-14));
    const LayerStack v3 = first_order_profile(one, 3, kBeta);
    CHECK(sup(v3.vbar.row(0) - v3.vbar.row(1)) < 1e-14);
    for (const PeriodicField& k : {one, wavy(128)}) {
      for (int m : {2, 3, 6}) {
        Eigen::MatrixXd s = S0_bar(first_order_profile(k, m, kBeta).vbar);
        s.rowwise() += (k.values / kBeta).transpose();
        CHECK(sup(s) < 1e-12);
      }
    }
  }

  TEST_CASE("S0 and S") {
    CHECK(sup(S0_bar(Eigen::MatrixXd::Constant(2, 16, 50.0))) < 1e-25);
    CHECK(S0_bar(Eigen::MatrixXd::Zero(1, 16))(0, 2) == doctest::Approx(-2.0));
    const Eigen::MatrixXd s3 = S0_bar(Eigen::MatrixXd::Zero(2, 16));
    CHECK(s3(0, 1) == doctest::Approx(-1.0));
    CHECK(s3(1, 1) == doctest::Approx(-1.0));

    const PeriodicField one = PeriodicField::constant(PeriodicGrid(16, 2.0), 1.0);
    const LayerStack v = first_order_profile(one, 3, kBeta);
    CHECK(sup(S_bar(v.vbar, 0.03, one, kBeta) - 0.03 * v.vbar) < 1e-13);
    const PeriodicField k = wavy(32);
    const LayerStack vk = first_order_profile(k, 3, kBeta);
    CHECK(sup(S_bar(vk.vbar, 0.0, k, kBeta)) < 1e-12);

    // Rotating the samples commutes with S.
    Eigen::MatrixXd vr = Eigen::MatrixXd::Random(2, 32).array() + 2.0;
    const Eigen::MatrixXd base = S_bar(vr, 0.05, k, kBeta);
    Eigen::MatrixXd rot(2, 32);
    Eigen::VectorXd krot(32);
    for (int i = 0; i < 32; ++i) rot.col(i) = vr.col((i + 5) % 32), krot[i] = k.values[(i + 5) % 32];
    const Eigen::MatrixXd shifted = S_bar(rot, 0.05, PeriodicField(k.grid, krot), kBeta);
    for (int i = 0; i < 32; ++i) CHECK((shifted.col(i) - base.col((i + 5) % 32)).cwiseAbs().maxCoeff() < 1e-11);
  }

  TEST_CASE("pointwise Jacobian") {
    const PeriodicField one = PeriodicField::constant(PeriodicGrid(16, 2.0), 1.0);
    const LayerStack v = first_order_profile(one, 2, kBeta);
    // sqrt2 * C * e^{-sqrt2 v1} with e^{-sqrt2 v1} = K a_1 / (2 beta).
    CHECK(DS0_bar(v.vbar)[0](0, 0) == doctest::Approx(sqrt2 / kBeta).epsilon(1e-13));

    const PeriodicField k = wavy(16);
    const LayerStack v4 = first_order_profile(k, 4, kBeta);
    const auto d = DS0_bar(v4.vbar);
    for (const auto& j : d) CHECK(std::abs(j.determinant()) > 0.0);
    double err[2];
    const double steps[2] = {1e-3, 5e-4};
    for (int s = 0; s < 2; ++s) {
      err[s] = 0.0;
      for (int c = 0; c < 3; ++c) {
        Eigen::MatrixXd p = v4.vbar, q = v4.vbar;
        p.row(c).array() += steps[s];
        q.row(c).array() -= steps[s];
        const Eigen::MatrixXd fd = (S0_bar(p) - S0_bar(q)) / (2 * steps[s]);
        for (int i = 0; i < 16; ++i) err[s] = std::max(err[s], (fd.col(i) - d[i].col(c)).cwiseAbs().maxCoeff());
      }
    }
    CHECK(err[0] < 1e-6);
    CHECK(std::log(err[0] / err[1]) / std::log(2.0) == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("corrections") {
    const PeriodicField k = wavy(64);
    CHECK(sup(iterate_corrections(k, 0.01, kBeta, 3, 1).vbar - first_order_profile(k, 3, kBeta).vbar) == 0.0);
    CHECK_THROWS_AS(iterate_corrections(k, 0.01, kBeta, 3, 7), DomainError);
    CHECK_THROWS_AS(iterate_corrections(k, 0.01, kBeta, 3, 0), DomainError);

    // Constant K: v^2 = v^1 - sigma K (DS0)^{-1} v^1 is exact algebra.
    const PeriodicField one = PeriodicField::constant(PeriodicGrid(16, 2.0), 1.0);
    const double sigma = 0.01;
    const LayerStack v1 = first_order_profile(one, 3, kBeta);
    const LayerStack v2 = iterate_corrections(one, sigma, kBeta, 3, 2);
    const Eigen::VectorXd expect = v1.vbar.col(0) - sigma * DS0_bar(v1.vbar)[0].lu().solve(v1.vbar.col(0));
    CHECK((v2.vbar.col(4) - expect).cwiseAbs().maxCoeff() < 1e-13);

    // Orders in the asymptotic range of sigma.
    const std::vector<double> sig = {0.01, 0.005, 0.0025, 0.00125};
    for (int order = 1; order <= 3; ++order) {
      std::vector<double> r;
      for (double s : sig) r.push_back(sup(S_bar(iterate_corrections(k, s, kBeta, 3, order).vbar, s, k, kBeta)));
      const double slope = std::log(r.front() / r.back()) / std::log(sig.front() / sig.back());
      CHECK(slope == doctest::Approx(order).epsilon(0.25 / order));
    }
  }

  TEST_CASE("linearized operator") {
    const PeriodicField one = PeriodicField::constant(PeriodicGrid(16, 2.0), 1.0);
    const double sigma = 0.03;
    const LayerStack v1 = first_order_profile(one, 3, kBeta);
    const Eigen::MatrixXd g = Eigen::MatrixXd::Constant(2, 16, 0.7);
    const LinearizedSolution sol = solve_linearized(g, v1.vbar, sigma, one);
    const Eigen::MatrixXd a = sigma * Eigen::MatrixXd::Identity(2, 2) + DS0_bar(v1.vbar)[0];
    const Eigen::VectorXd expect = -a.lu().solve(Eigen::VectorXd::Constant(2, 0.7));
    CHECK((sol.omega.col(3) - expect).cwiseAbs().maxCoeff() < 1e-12);

    const PeriodicField k = wavy(32);
    const LayerStack vk = first_order_profile(k, 3, kBeta);
    const Eigen::MatrixXd rg = Eigen::MatrixXd::Random(2, 32);
    const Eigen::MatrixXd om = solve_linearized(rg, vk.vbar, sigma, k).omega;
    const Eigen::MatrixXd L = linearized_matrix(vk.vbar, sigma, k);
    Eigen::VectorXd flat(64), gf(64);
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < 32; ++i) flat[l * 32 + i] = om(l, i), gf[l * 32 + i] = rg(l, i);
    CHECK((L * flat - gf).cwiseAbs().maxCoeff() < 1e-10 * sup(rg));

    // Symmetric form agrees with L_sigma built from A.
    const Eigen::MatrixXd Ls = symmetrized_linearized_matrix(vk.vbar, sigma, k);
    CHECK((Ls - Ls.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const MatrixFieldA A = assemble_A(vk.vbar, sigma, k, build_matrices(3));
    const Eigen::MatrixXd Lspec = assemble_L_sigma(A, sigma);
    CHECK((Ls - Lspec).cwiseAbs().maxCoeff() < 1e-10 * Lspec.cwiseAbs().maxCoeff());
  }

  TEST_CASE("resonant linearization is rejected") {
    const PeriodicGrid g(64, 2 * pi);
    const PeriodicField one = PeriodicField::constant(g, 1.0);
    const LayerStack v = first_order_profile(one, 2, kBeta);
    // Mode j is singular when sigma (j^2 - 1) = DS0 = 1/12; j = 2 gives 1/36.
    const double sigma = 1.0 / 36.0;
    CHECK_THROWS_AS(solve_linearized(Eigen::MatrixXd::Ones(1, 64), v.vbar, sigma, one), ResonanceError);
  }

  TEST_CASE("solve against algebraic oracle") {
    const Scales s = scales_of(0.05);
    const PeriodicField one = PeriodicField::constant(PeriodicGrid(16, 2.0), 1.0);
    for (int m : {2, 3, 4, 5}) {
      const TodaSolution sol = solve_toda(one, s, m);
      CHECK(sol.residual < 1e-11);
      CHECK(sol.v.vm.cwiseAbs().maxCoeff() < 1e-12);
      // y-independent and reflection symmetric.
      for (int l = 0; l < m - 1; ++l) {
        CHECK(sol.v.vbar.row(l).maxCoeff() - sol.v.vbar.row(l).minCoeff() < 1e-10);
        CHECK(std::abs(sol.v.vbar(l, 0) - sol.v.vbar(m - 2 - l, 0)) < 1e-10);
      }
      // Pointwise algebra: sigma v + 1/beta - C e^{-sqrt2 v} = 0.
      Eigen::VectorXd v = sol.v.vbar.col(0);
      Eigen::VectorXd r = s.sigma * v + Eigen::VectorXd::Constant(m - 1, 1.0 / s.beta) -
                          build_matrices(m).C * (-sqrt2 * v.array()).exp().matrix();
      CHECK(r.cwiseAbs().maxCoeff() < 1e-11);
    }
  }

  TEST_CASE("fixed point and Newton agree") {
    const Scales s = scales_of(0.01);
    const PeriodicField k = wavy(32, 2 * pi, 0.2);
    TodaOptions fp;
    fp.method = TodaMethod::fixed_point;
    TodaOptions nt;
    nt.method = TodaMethod::newton;
    const TodaSolution a = solve_toda(k, s, 3, fp), b = solve_toda(k, s, 3, nt);
    CHECK(a.method == "fixed_point");
    CHECK(b.method == "newton");
    CHECK(sup(a.v.vbar - b.v.vbar) < 1e-9);
  }

  TEST_CASE("continuation reaches solutions where plain Newton stalls") {
    const PeriodicField k = wavy(32, 2.0, 0.2);
    for (double eps : {0.01, 0.02, 0.04}) {
      const Scales s = scales_of(eps);
      const TodaSolution sol = solve_toda(k, s, 2);
      CHECK(sol.method == "continuation");
      CHECK(sup(S_bar(sol.v.vbar, s.sigma, k, s.beta)) < 1e-11);
    }
  }

  TEST_CASE("continuous dependence on K") {
    const Scales s = scales_of(0.02);
    const TodaSolution base = solve_toda(wavy(32, 2 * pi, 0.2), s, 2);
    double prev = 0.0;
    for (double d : {0.02, 0.01, 0.005}) {
      const PeriodicField k = sample_curvature(ClosedCurve(2 * pi, FourierCurvature{1.0, {0.2, d}, {}}),
                                               PeriodicGrid(32, 2 * pi));
      const double diff = sup(solve_toda(k, s, 2).v.vbar - base.v.vbar);
      if (prev > 0.0) CHECK(prev / diff == doctest::Approx(2.0).epsilon(0.1));
      prev = diff;
    }
  }

  TEST_CASE("degenerate Jacobi operator") {
    const PeriodicField one = PeriodicField::constant(PeriodicGrid(16, 2 * pi), 1.0);
    CHECK_THROWS_AS(solve_toda(one, scales_of(0.05), 2), ResonanceError);
  }

  TEST_CASE("nonzero sum equation") {
    const PeriodicField k = wavy(32);
    TodaOptions o;
    o.gm = Eigen::VectorXd::Constant(32, 0.1);
    const TodaSolution sol = solve_toda(k, scales_of(0.05), 2, o);
    // sigma (vm'' + K vm) = gm
    const double s = scales_of(0.05).sigma;
    const PeriodicField vm(k.grid, sol.v.vm);
    CHECK((s * jacobi_apply(vm, k).values - o.gm.value()).cwiseAbs().maxCoeff() < 1e-10);
  }
}
