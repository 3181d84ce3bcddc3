#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "mlac/ansatz.hpp"
#include "mlac/errors.hpp"
#include "mlac/profile.hpp"

using namespace mlac;
using std::numbers::pi;
using std::numbers::sqrt2;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

double sup(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

StripGrid grid(double eps, double len = 2.0, int n_y = 16, double T = 12.0, int n_t = 481) {
  return StripGrid(PeriodicGrid(n_y, len), eps, T, n_t);
}
}  // namespace

TEST_SUITE("ansatz") {
  TEST_CASE("grid") {
    const StripGrid g = grid(0.05);
    CHECK(g.t(240) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g.dt() == doctest::Approx(0.05));
    CHECK(g.stretched_dy() == doctest::Approx(0.125 / 0.05));
    CHECK_THROWS_AS(grid(0.05, 2.0, 16, 12.0, 480), DomainError);
    CHECK_THROWS_AS(grid(0.3), DomainError);
    const Scales s = scales_of(0.05);
    CHECK(auto_t_extent(2, s) == doctest::Approx(2.0 * s.rho + 6.0));
  }

  TEST_CASE("u0 construction") {
    const StripGrid g = grid(0.05);
    const Scales s = scales_of(0.05);
    const StripField one = assemble_u0(Eigen::MatrixXd::Zero(1, 16), g, s);
    for (int j = 0; j < g.n_t; ++j) CHECK(one.values(3, j) == doctest::Approx(heteroclinic(g.t(j))).epsilon(1e-15));
    CHECK(std::abs(one.values(3, 240)) < 1e-15);

    const Eigen::MatrixXd f = f_from_h(HStack{g.y_grid, Eigen::MatrixXd::Zero(2, 16)}, s);
    const StripField two = assemble_u0(f, g, s);
    CHECK(two.values(0, 240) == doctest::Approx(2.0 * heteroclinic(s.rho / 2) - 1.0).epsilon(1e-14));
    // Leading tail term, next correction is O(e^{-sqrt2 rho}).
    CHECK(std::abs(two.values(0, 240) - (1.0 - 4.0 * std::exp(-sqrt2 * s.rho / 2))) < 8.0 * std::exp(-sqrt2 * s.rho));
    const double tail = 3.0 * std::exp(-sqrt2 * (g.t_extent - s.rho / 2));
    CHECK(std::abs(two.values(0, 0) + 1.0) < tail);
    CHECK(std::abs(two.values(0, g.n_t - 1) + 1.0) < tail);

    const Eigen::MatrixXd f3 = f_from_h(HStack{g.y_grid, Eigen::MatrixXd::Zero(3, 16)}, s);
    const StripField three = assemble_u0(f3, grid(0.05, 2.0, 16, 16.0, 641), s);
    CHECK(std::abs(three.values(0, 640) - 1.0) < 1e-4);
    CHECK_THROWS_AS(assemble_u0(f3, grid(0.05, 2.0, 16, 5.0, 201), s), DomainError);
  }

  TEST_CASE("strip operator") {
    const StripGrid g = grid(0.05, 2.0, 16, 10.0, 801);
    const PeriodicField k = sample_curvature(ClosedCurve(2.0, FourierCurvature{1.0, {0.3}, {}}), g.y_grid);
    const StripField w = StripField::sample(g, [](double, double t) { return heteroclinic(t); });
    const StripField lw = strip_operator(w, k);
    double err = 0.0;
    for (int i = 0; i < g.n_y(); ++i)
      for (int j = 40; j < g.n_t - 40; ++j) {
        const double t = g.t(j);
        const double expect = heteroclinic_second_derivative(t) - 0.0025 * t * k.values[i] * heteroclinic_derivative(t);
        err = std::max(err, std::abs(lw.values(i, j) - expect));
      }
    CHECK(err < 1e-8);

    const StripField c = StripField::sample(g, [](double y, double) { return std::cos(pi * y); });
    const StripField lc = strip_operator(c, k);
    CHECK(sup(lc.values + 0.0025 * pi * pi * c.values) < 1e-10);

    const StripField a = StripField::sample(g, [](double y, double t) { return std::sin(pi * y) * std::exp(-t * t); });
    const StripField sum(g, 2.0 * a.values - 3.0 * w.values);
    CHECK(sup(strip_operator(sum, k).values - 2.0 * strip_operator(a, k).values + 3.0 * lw.values) < 1e-12 * sup(sum.values) * 1e3);

    const Eigen::SparseMatrix<double> A = strip_operator_matrix(g, k);
    Eigen::VectorXd flat(g.n_y() * g.n_t);
    for (int i = 0; i < g.n_y(); ++i)
      for (int j = 0; j < g.n_t; ++j) flat[i * g.n_t + j] = a.values(i, j);
    const Eigen::VectorXd out = A * flat;
    const StripField la = strip_operator(a, k);
    double diff = 0.0;
    for (int i = 0; i < g.n_y(); ++i)
      for (int j = 0; j < g.n_t; ++j) diff = std::max(diff, std::abs(out[i * g.n_t + j] - la.values(i, j)));
    CHECK(diff < 1e-10);
  }

  TEST_CASE("residual basics") {
    const StripGrid g = grid(0.01, 2.0, 16, 10.0, 1601);
    const PeriodicField k = PeriodicField::constant(g.y_grid, 1.0);
    CHECK(sup(residual(StripField::sample(g, [](double, double) { return 1.0; }), k).values) < 1e-12);
    const StripField w = StripField::sample(g, [](double, double t) { return heteroclinic(t); });
    Eigen::MatrixXd r = residual(w, k).values;
    // Remove the curvature drift, left with the discretization error.
    for (int j = 0; j < g.n_t; ++j) r.col(j).array() += 1e-4 * g.t(j) * heteroclinic_derivative(g.t(j));
    CHECK(sup(r.middleCols(20, g.n_t - 40)) < 1e-9);
  }

  TEST_CASE("layer model matches the grid residual") {
    const Scales s = scales_of(0.05);
    const PeriodicGrid yg(32, 2.0);
    const PeriodicField k = sample_curvature(ClosedCurve(2.0, FourierCurvature{1.0, {0.3}, {}}), yg);
    HStack h{yg, Eigen::MatrixXd::Zero(2, 32)};
    for (int i = 0; i < 32; ++i) h.h(0, i) = -0.2 * std::cos(pi * yg.point(i)), h.h(1, i) = 0.3 * std::sin(pi * yg.point(i));
    const Eigen::MatrixXd f = f_from_h(h, s);
    const StripGrid g(yg, 0.05, auto_t_extent(2, s), 2001);
    const StripField r = residual(assemble_u0(f, g, s), k);
    const LayerModel model(f, k, 0.05);
    double err = 0.0;
    for (int i = 0; i < 32; ++i)
      for (int j = 100; j < g.n_t - 100; ++j) err = std::max(err, std::abs(model.residual(i, g.t(j)) - r.values(i, j)));
    CHECK(err < 1e-7);
  }

  TEST_CASE("expansion prediction") {
    const Scales s = scales_of(0.05);
    const PeriodicGrid yg(16, 2.0);
    const PeriodicField one = PeriodicField::constant(yg, 1.0);
    const HStack h0{yg, Eigen::MatrixXd::Zero(3, 16)};
    Eigen::VectorXd t0(1);
    t0 << 0.0;
    const ExpansionTerms mid = expansion_prediction(2, h0, one, s, t0);
    CHECK(std::abs(mid.interaction(0, 0)) < 1e-16);
    CHECK(sup(mid.jacobi) == 0.0);
    CHECK(sup(mid.gradient) == 0.0);

    // First layer: only the upper neighbour, carrying e^{+sqrt2 t}.
    Eigen::VectorXd tw(3);
    tw << -1.0, 0.0, 1.0;
    const ExpansionTerms first = expansion_prediction(1, h0, one, s, tw);
    for (int j = 0; j < 3; ++j) {
      const double w = heteroclinic(tw[j]);
      CHECK(first.interaction(4, j) ==
            doctest::Approx(-6.0 * (1 - w * w) * 0.0025 * s.rho * std::exp(sqrt2 * tw[j])).epsilon(1e-12));
    }
    Eigen::VectorXd far(1);
    far << s.rho / 2 + 3.0;
    CHECK_THROWS_AS(expansion_prediction(1, h0, one, s, far), DomainError);
    CHECK_THROWS_AS(expansion_prediction(4, h0, one, s, t0), DomainError);
  }

  TEST_CASE("expansion remainder decays faster than eps^2") {
    // Near each layer (|t| <= 1) the residual minus the prediction is o(eps^2).
    const PeriodicGrid yg(16, 2.0);
    const PeriodicField k = sample_curvature(ClosedCurve(2.0, FourierCurvature{1.0, {0.3}, {}}), yg);
    HStack h{yg, Eigen::MatrixXd::Zero(3, 16)};
    for (int i = 0; i < 16; ++i) h.h(0, i) = 0.3 * std::cos(pi * yg.point(i)), h.h(2, i) = -0.2 * std::sin(pi * yg.point(i));
    const Eigen::VectorXd tw = Eigen::VectorXd::LinSpaced(41, -1.0, 1.0);
    std::vector<double> rem;
    for (double e : {0.04, 0.02, 0.01}) {
      const Scales s = scales_of(e);
      const LayerModel model(f_from_h(h, s), k, e);
      double worst = 0.0;
      for (int ell = 1; ell <= 3; ++ell) {
        const Eigen::MatrixXd pred = expansion_prediction(ell, h, k, s, tw).total();
        for (int i = 0; i < 16; ++i)
          for (int j = 0; j < tw.size(); ++j)
            worst = std::max(worst, std::abs(model.residual(i, tw[j] + model.f()(ell - 1, i)) - pred(i, j)));
      }
      rem.push_back(worst);
    }
    CHECK(std::log(rem[0] / rem[2]) / std::log(4.0) > 2.1);

    const ResidualReport r = residual_report(h, k, scales_of(0.05), 4.0, 1.0);
    CHECK(r.per_layer_total.size() == 3);
    CHECK(r.total > 0.0);
    CHECK(r.total == doctest::Approx(*std::max_element(r.per_layer_total.begin(), r.per_layer_total.end())));
  }

  TEST_CASE("weighted norm") {
    const StripGrid g = grid(0.1, 2.0, 16, 8.0, 321);
    CHECK(weighted_norm(StripField::zeros(g), 4.0, 1.0) == 0.0);
    const StripField e = StripField::sample(g, [](double, double t) { return std::exp(-std::abs(t)); });
    // Weight cancels the decay: every ball sees the same value, up to the ball discretization.
    const auto ball = unit_ball(g.stretched_dy(), g.dt(), g.n_y());
    const double measure = ball.size() * g.dt() * std::min(g.stretched_dy(), 1.0);
    const double n4 = weighted_norm(e, 4.0, 1.0);
    CHECK(n4 >= std::pow(measure, 0.25) * 0.99);
    CHECK(n4 <= std::pow(measure, 0.25) * std::exp(1.0) * 1.01);
    // The ball reaches one unit closer to t = 0, where g is e times larger.
    CHECK(weighted_norm(e, kInf, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    const StripField r = StripField::sample(g, [](double y, double t) { return std::sin(3 * y) / (1 + t * t); });
    const StripField r3(g, -3.0 * r.values);
    CHECK(weighted_norm(r3, 4.0, 1.0) == doctest::Approx(3.0 * weighted_norm(r, 4.0, 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(weighted_norm(r, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(weighted_norm(r, 4.0, 2.0), DomainError);
  }

  TEST_CASE("projected problem") {
    const PeriodicGrid yg(32, 2 * pi);
    const StripGrid g(yg, 0.05, 10.0, 201);
    const ProjectedSolution k =
        solve_projected(StripField::sample(g, [](double, double t) { return heteroclinic_derivative(t); }));
    CHECK((k.c.values.array() + 1.0).abs().maxCoeff() < 1e-9);
    CHECK(sup(k.phi.values) < 1e-9);

    // (1 - w^2) = sqrt2 w' is pure kernel direction.
    const ProjectedSolution deg = solve_projected(StripField::sample(g, [](double y, double t) {
      const double w = heteroclinic(t);
      return (1 - w * w) * std::cos(y);
    }));
    CHECK(sup(deg.phi.values) < 1e-9);
    for (int i = 0; i < 32; ++i) CHECK(deg.c.values[i] == doctest::Approx(-sqrt2 * std::cos(yg.point(i))).epsilon(1e-8));

    const StripField rhs = StripField::sample(g, [](double y, double t) {
      const double w = heteroclinic(t);
      return (1 - w * w) * (1 - w * w) * std::cos(y);
    });
    const ProjectedSolution p = solve_projected(rhs);
    CHECK(sup(p.phi.values) > 1e-3);
    CHECK(p.orthogonality < 1e-9 * sup(p.phi.values));
    // (phi_tt + phi_yy + F'(w) phi) - c w' = g, checked away from the walls.
    const PeriodicField zero = PeriodicField::constant(yg, 0.0);
    const StripField lphi = strip_operator(p.phi, zero);
    double err = 0.0;
    for (int i = 0; i < 32; ++i)
      for (int j = 10; j < 191; ++j) {
        const double w = heteroclinic(g.t(j));
        const double lhs = lphi.values(i, j) + (1 - 3 * w * w) * p.phi.values(i, j);
        err = std::max(err, std::abs(lhs - rhs.values(i, j) - p.c.values[i] * heteroclinic_derivative(g.t(j))));
      }
    CHECK(err < 1e-6);
  }

  TEST_CASE("Newton: single layer") {
    const PeriodicGrid yg(16, 2.0);
    const PeriodicField k = PeriodicField::constant(yg, 1.0);
    const StripGrid g(yg, 0.05, 10.0, 401);
    const StripField u0 = assemble_u0(Eigen::MatrixXd::Zero(1, 16), g, scales_of(0.05));
    const NewtonResult r = newton_allen_cahn(u0, k, 1);
    CHECK(r.iterations <= 5);
    CHECK(r.residual < 1e-9);
    REQUIRE(r.level_set_count == 1);
    CHECK(r.level_sets.cwiseAbs().maxCoeff() < g.dt());
    CHECK(r.residual_history.size() == r.energy_history.size());
  }

  TEST_CASE("Newton: level-set count is enforced") {
    const PeriodicGrid yg(16, 2.0);
    const PeriodicField k = PeriodicField::constant(yg, 1.0);
    const StripGrid g(yg, 0.05, 10.0, 401);
    const StripField u0 = assemble_u0(Eigen::MatrixXd::Zero(1, 16), g, scales_of(0.05));
    CHECK_THROWS_AS(newton_allen_cahn(u0, k, 2), NumericalError);
  }

  TEST_CASE("zero level sets and energy") {
    const StripGrid g = grid(0.05, 2.0, 16, 5.0, 101);
    const StripField u = StripField::sample(g, [](double, double t) { return std::tanh(t - 0.33); });
    const auto ls = zero_level_sets(u);
    REQUIRE(ls.size() == 16);
    REQUIRE(ls[0].size() == 1);
    CHECK(ls[0][0] == doctest::Approx(0.33).epsilon(0.01));
    CHECK(strip_energy(StripField::sample(g, [](double, double) { return 1.0; })) == doctest::Approx(0.0));
    CHECK(strip_energy(u) > 0.0);
  }
}
