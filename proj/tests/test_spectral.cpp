#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mlac/errors.hpp"
#include "mlac/spectral.hpp"
#include "mlac/toda.hpp"

using namespace mlac;
using std::numbers::pi;
using std::numbers::sqrt2;

namespace {
const double kBeta = 12.0 * sqrt2;

MatrixFieldA constant_A(const PeriodicGrid& g, double a) {
  return MatrixFieldA{g, 1, std::vector<Eigen::MatrixXd>(g.n, Eigen::MatrixXd::Constant(1, 1, a))};
}

ClosedCurve wavy_curve() { return ClosedCurve(2 * pi, FourierCurvature{1.0, {0.3}, {}}); }
}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("A matrix") {
    const PeriodicField one = PeriodicField::constant(PeriodicGrid(16, 2.0), 1.0);
    const LayerStack v = first_order_profile(one, 2, kBeta);
    const MatrixFieldA a0 = assemble_A(v.vbar, 0.0, one, build_matrices(2));
    // K/(sqrt2 beta) C^{1/2} a_1 C^{1/2} = 2/(sqrt2 beta).
    CHECK(a0.entries[3](0, 0) == doctest::Approx(2.0 / (sqrt2 * kBeta)).epsilon(1e-13));
    CHECK(A_at_zero(one, 2, kBeta).entries[3](0, 0) == doctest::Approx(a0.entries[3](0, 0)).epsilon(1e-13));

    const PeriodicField k = sample_curvature(wavy_curve(), PeriodicGrid(32, 2 * pi));
    for (int m : {3, 5}) {
      const LayerStack vk = first_order_profile(k, m, kBeta);
      const MatrixFieldA a0k = assemble_A(vk.vbar, 0.0, k, build_matrices(m));
      const MatrixFieldA z = A_at_zero(k, m, kBeta);
      for (int i = 0; i < 32; ++i) CHECK((a0k.entries[i] - z.entries[i]).cwiseAbs().maxCoeff() < 1e-13);
      for (double s : {0.01, 0.05, 0.1}) {
        const MatrixFieldA a = assemble_A(vk.vbar, s, k, build_matrices(m));
        for (const auto& e : a.entries) CHECK((e - e.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(a.gamma_minus() > 0.0);
        CHECK(a.gamma_plus() >= a.gamma_minus());
      }
    }
  }

  TEST_CASE("constant-coefficient spectrum") {
    const double len = 3.0, a = 0.4, sigma = 0.02;
    const PeriodicGrid g(32, len);
    const EigenReport r = eigs_L_sigma(constant_A(g, a), sigma);
    std::vector<double> expect;
    for (int j = -15; j <= 16; ++j) expect.push_back(sigma * std::pow(2 * pi * j / len, 2) - a);
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 12; ++i) CHECK(std::abs(r.eigenvalues[i] - expect[i]) < 1e-10 * std::max(1.0, std::abs(expect[i])));
    int neg = 0;
    for (double e : expect) neg += e < 0.0;
    CHECK(r.negative_count == neg);

    // Identity shift moves every eigenvalue by exactly the shift.
    const EigenReport shifted = eigs_L_sigma(constant_A(g, a + 0.25), sigma);
    CHECK((r.eigenvalues - shifted.eigenvalues).array().abs().maxCoeff() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(((r.eigenvalues - shifted.eigenvalues).array() - 0.25).abs().maxCoeff() < 1e-10);
  }

  TEST_CASE("negative count decreases with sigma") {
    const PeriodicField k = sample_curvature(wavy_curve(), PeriodicGrid(64, 2 * pi));
    const MatrixFieldA a = A_at_zero(k, 3, kBeta);
    int prev = 1 << 30;
    for (double s = 1e-3; s < 0.2; s *= 1.5) {
      const int n = eigs_L_sigma(a, s).negative_count;
      CHECK(n <= prev);
      prev = n;
    }
  }

  TEST_CASE("monotonicity inequalities") {
    const PeriodicGrid g(32, 2 * pi);
    AFamily fixed = [&](double) { return constant_A(g, 0.3); };
    const MonotonicityReport same = monotonicity_check(0.05, 0.05, fixed, 10);
    CHECK(same.differences.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(same.lower_bound) < 1e-16);
    CHECK(std::abs(same.upper_bound) < 1e-16);
    const MonotonicityReport c = monotonicity_check(0.04, 0.05, fixed, 20);
    CHECK(c.holds);
    const double closed = 0.3 * (0.05 - 0.04) / (0.04 * 0.05);
    CHECK((c.differences.array() - closed).abs().maxCoeff() < 1e-9);

    const PeriodicField k = sample_curvature(ClosedCurve(2 * pi, FourierCurvature{1.1, {0.2, -0.1}, {0.15}}), g);
    const LayerStack v = first_order_profile(k, 3, kBeta);
    CHECK(monotonicity_check(0.04, 0.05, frozen_family(v.vbar, k), 20).holds);
  }

  TEST_CASE("Weyl count") {
    CHECK(weyl_count(1.0, 1.0, 2 * pi) == 1);
    // j = +-10 sits exactly at zero and is not counted.
    CHECK(weyl_count(0.01, 1.0, 2 * pi) == 19);
    CHECK(weyl_limit(1.0, 2 * pi) == doctest::Approx(2.0));
    for (double s : {1e-3, 1e-4}) CHECK(weyl_count(s, 1.0, 2 * pi) * std::sqrt(s) == doctest::Approx(2.0).epsilon(0.05));
    const double a = weyl_count(4e-4, 1.0, 2 * pi) * std::sqrt(4e-4), b = weyl_count(1e-4, 1.0, 2 * pi) * 1e-2;
    CHECK(std::abs(a / b - 1.0) < 0.05);
  }

  TEST_CASE("Sturm-Liouville eigenvalues") {
    const PeriodicGrid g(64, 2 * pi);
    const Eigen::VectorXd l1 = sturm_liouville_eigs(PeriodicField::constant(g, 1.0), 9);
    const double expect[9] = {0, 1, 1, 4, 4, 9, 9, 16, 16};
    for (int i = 0; i < 9; ++i) CHECK(std::abs(l1[i] - expect[i]) < 1e-8);
    const Eigen::VectorXd l3 = sturm_liouville_eigs(PeriodicField::constant(g, 3.0), 9);
    CHECK((l3 - l1 / 3.0).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd lk = sturm_liouville_eigs(sample_curvature(wavy_curve(), g), 9);
    CHECK(lk.minCoeff() > -1e-10);
    CHECK(std::abs(lk[0]) < 1e-10);
    CHECK(lk[1] > 1e-3);
  }

  TEST_CASE("Liouville transform") {
    const LiouvilleTransform flat = liouville_transform(ClosedCurve(1.0, ConstantCurvature{4.0}));
    CHECK(flat.ell0 == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(flat.q.cwiseAbs().maxCoeff() < 1e-10);

    const ClosedCurve c = wavy_curve();
    const LiouvilleTransform lt = liouville_transform(c);
    CHECK(lt.ell0 == doctest::Approx(6.24707).epsilon(1e-5));
    for (int i = 1; i < lt.y_of_t.size(); ++i) CHECK(lt.y_of_t[i] > lt.y_of_t[i - 1]);
    CHECK(lt.y_of_t[0] == doctest::Approx(0.0));

    const Eigen::VectorXd direct = sturm_liouville_eigs(sample_curvature(c, PeriodicGrid(128, 2 * pi)), 10);
    const Eigen::VectorXd transformed = liouville_eigs(lt, 10);
    for (int i = 1; i < 10; ++i) CHECK(std::abs(transformed[i] / direct[i] - 1.0) < 1e-6);
    CHECK(std::abs(transformed[0] - direct[0]) < 1e-8);

    // Asymptotics with the mean potential shift, j^2 |error| bounded.
    const Eigen::VectorXd many = sturm_liouville_eigs(sample_curvature(c, PeriodicGrid(256, 2 * pi)), 52);
    double worst = 0.0;
    for (int j = 5; j <= 25; ++j)
      for (int idx : {2 * j - 1, 2 * j}) worst = std::max(worst, j * j * std::abs(many[idx] - lt.asymptotic_eigenvalue(j)));
    CHECK(worst < 0.01);
  }

  TEST_CASE("circle resonances") {
    const PeriodicField k = PeriodicField::constant(PeriodicGrid(64, 2 * pi), 1.0);
    const std::vector<double> r = detect_resonances(k, 2, kBeta, 1e-2, 1e-1);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(1.0 / 48.0).epsilon(1e-8));
    CHECK(r[1] == doctest::Approx(1.0 / 12.0).epsilon(1e-8));

    const ResonanceAnalyzer an(ClosedCurve(2 * pi, ConstantCurvature{1.0}), 2, default_constants(), 1e-3);
    CHECK(an.mu()[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
    CHECK(an.at_sigma(1.0 / 48.0, 0.5).min_margin < 1e-8);
    CHECK_FALSE(an.at_sigma(1.0 / 48.0, 0.5).admissible);
  }

  TEST_CASE("margins and admissibility") {
    const ResonanceAnalyzer an(wavy_curve(), 3, default_constants(), scales_of(0.005).sigma);
    const ScanResult half = scan_epsilons(an, 0.005, 0.15, 120, 0.1);
    const ScanResult twice = scan_epsilons(an, 0.005, 0.15, 120, 0.2);
    CHECK_FALSE(half.admissible_epsilons.empty());
    CHECK(twice.admissible_epsilons.size() <= half.admissible_epsilons.size());
    for (double e : twice.admissible_epsilons)
      CHECK(std::find(half.admissible_epsilons.begin(), half.admissible_epsilons.end(), e) != half.admissible_epsilons.end());
    const ScanResult zero = scan_epsilons(an, 0.005, 0.15, 120, 0.0);
    int exact = 0;
    for (const auto& p : zero.points) exact += p.min_margin == 0.0;
    CHECK(zero.admissible_epsilons.size() + exact == zero.points.size());
    for (std::size_t i = 1; i < half.points.size(); ++i) CHECK(half.points[i].epsilon > half.points[i - 1].epsilon);

    const ResonanceReport single = resonance_margin(0.05, wavy_curve(), 3, default_constants(), 0.1);
    CHECK(single.margins.rows() == 2);
    CHECK(single.min_margin == doctest::Approx(single.margins.minCoeff()));
  }

  TEST_CASE("margins are continuous between resonances") {
    const ResonanceAnalyzer an(ClosedCurve(2 * pi, ConstantCurvature{1.0}), 2, default_constants(), 0.02);
    // No resonance between 1/48 and 1/12.
    double prev = an.at_sigma(0.03, 0.5).min_margin;
    for (double s = 0.0301; s < 0.07; s += 1e-4) {
      const double m = an.at_sigma(s, 0.5).min_margin;
      CHECK(std::abs(m - prev) < 0.01);
      prev = m;
    }
  }

  TEST_CASE("input validation") {
    const PeriodicField k = PeriodicField::constant(PeriodicGrid(16, 2.0), 1.0);
    CHECK_THROWS_AS(A_at_zero(k, 1, kBeta), DomainError);
    CHECK_THROWS_AS(sturm_liouville_eigs(k, 0), DomainError);
    CHECK_THROWS_AS(weyl_count(-1.0, 1.0, 2.0), DomainError);
  }
}
