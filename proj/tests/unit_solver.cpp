#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "prescurv/solver.hpp"

using namespace prescurv;

namespace {

constexpr double pi = std::numbers::pi;

// radial bump vanishing on both boundary rings
ScalarField star_exponent(const GridPtr& g) {
  ScalarField s(g);
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j)
      s(i, j) =
          0.3 * std::sin(pi * (g->c1[i] - g->r_in) / (g->r_out - g->r_in));
  for (int n = 0; n < g->size(); ++n)
    if (g->bdry[n]) s.v[n] = 0.0;
  return s;
}

// target manufactured so star_exponent solves the discrete equation exactly
CurvatureProblem manufactured_problem(int nr, int nt) {
  const ConformalMetric m = cusp_metric(build_annulus(0.1, 0.9, nr, nt));
  const ScalarField s = star_exponent(m.g);
  ScalarField K = curvature_of(s, m);
  for (int n = 0; n < m.g->size(); ++n)
    if (m.g->bdry[n]) K.v[n] = m.K0.v[n];
  return make_problem(m, std::move(K), 0.0);
}

CurvatureProblem scaled_problem(double r_in, double r_out, int nr, int nt,
                                double collar) {
  const ConformalMetric m = cusp_metric(build_annulus(r_in, r_out, nr, nt));
  ScalarField K = blend_target(m, {TargetKind::scale, 2.0, {}}, collar);
  return make_problem(m, std::move(K), collar);
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double d = 0.0;
  for (int n = 0; n < a.size(); ++n)
    d = std::max(d, std::abs(a.v[n] - b.v[n]));
  return d;
}

}  // namespace

TEST_CASE("cg solves the discrete poisson eigenproblem in one sweep") {
  const GridPtr g = build_rectangle(1.0, 1.0, 129, 129);
  ScalarField rhs(g), w(g);
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j) {
      if (!g->bdry[g->index(i, j)])
        rhs(i, j) = std::sin(pi * g->c1[i]) * std::sin(pi * g->c2[j]);
      w(i, j) = 1.0;
    }
  const LinearOp apply = [](const ScalarField& in, ScalarField& out) {
    flat_laplacian_into(*in.g, in.v.data(), out.v.data());
    for (int n = 0; n < in.size(); ++n)
      out.v[n] = in.g->bdry[n] ? 0.0 : -out.v[n];
  };
  CgOptions opt;
  opt.tol = 1e-12;
  const CgResult r = cg_solve(apply, rhs, w, opt);

  // the rhs is an exact eigenvector of the 5-point stencil
  const double dx = g->d1;
  const double lam =
      2.0 * (4.0 / (dx * dx)) * std::pow(std::sin(pi * dx / 2.0), 2);
  CHECK(std::abs(lam - 2.0 * pi * pi) <= 5e-3 * 2.0 * pi * pi);
  CHECK(r.iters <= 3);
  CHECK(r.rel_residual <= 1e-12);
  double worst = 0.0;
  for (int n = 0; n < rhs.size(); ++n)
    worst = std::max(worst, std::abs(r.x.v[n] - rhs.v[n] / lam));
  CHECK(worst <= 1e-12);
}

TEST_CASE("cg edge cases and operator vetting") {
  const GridPtr g = build_rectangle(1.0, 1.0, 17, 17);
  ScalarField w(g);
  for (auto& v : w.v) v = 1.0;

  const LinearOp ident = [](const ScalarField& in, ScalarField& out) {
    for (int n = 0; n < in.size(); ++n)
      out.v[n] = in.g->bdry[n] ? 0.0 : in.v[n];
  };
  ScalarField zero(g);
  const CgResult rz = cg_solve(ident, zero, w, {});
  CHECK(rz.iters == 0);
  for (double v : rz.x.v) CHECK(v == 0.0);

  ScalarField rhs(g);
  for (int n = 0; n < g->size(); ++n)
    if (!g->bdry[n]) rhs.v[n] = std::cos(3.0 * n);
  const CgResult ri = cg_solve(ident, rhs, w, {});
  for (int n = 0; n < g->size(); ++n)
    CHECK(ri.x.v[n] == doctest::Approx(rhs.v[n]).epsilon(1e-12));

  const LinearOp skew = [](const ScalarField& in, ScalarField& out) {
    for (int n = 0; n < in.size(); ++n) {
      const int m = (n + 1) % in.size();
      out.v[n] = in.g->bdry[n] ? 0.0 : in.v[n] + 0.5 * in.v[m];
    }
  };
  CHECK_THROWS_AS(cg_solve(skew, rhs, w, {}), std::runtime_error);

  const LinearOp negative = [](const ScalarField& in, ScalarField& out) {
    for (int n = 0; n < in.size(); ++n)
      out.v[n] = in.g->bdry[n] ? 0.0 : -in.v[n];
  };
  CHECK_THROWS_AS(cg_solve(negative, rhs, w, {}), std::runtime_error);
}

TEST_CASE("newton linearization is positive definite in the dmu product") {
  const CurvatureProblem p = scaled_problem(0.2, 0.6, 32, 64, 0.04);
  const GridPtr& g = p.metric.g;
  std::vector<ScalarField> probes;
  probes.push_back(make_seed(g, {SeedSpec::Kind::random, 1.0, 5}));
  probes.push_back(make_seed(g, {SeedSpec::Kind::random, 1.0, 6}));
  probes.push_back(make_seed(g, {SeedSpec::Kind::uniform, 1.0, 0}));
  ScalarField Av(g);
  for (const ScalarField& v : probes) {
    flat_laplacian_into(*g, v.v.data(), Av.v.data());
    for (int n = 0; n < g->size(); ++n)
      Av.v[n] = g->bdry[n]
                    ? 0.0
                    : -0.5 * Av.v[n] / p.metric.h.v[n] - p.K.v[n] * v.v[n];
    CHECK(inner_product(Av, v, p.metric.weights) > 0.0);
  }
}

TEST_CASE("newton stops immediately on a satisfied target") {
  const ConformalMetric m = cusp_metric(build_annulus(0.1, 0.9, 32, 48));
  const CurvatureProblem p = make_problem(m, m.K0, 0.0);
  const SolveResult r = newton_solve(p, make_seed(m.g, {}), {});
  CHECK(r.converged);
  CHECK(r.history.size() == 1);
  CHECK(r.history[0].b_l2 == 0.0);
  for (double v : r.sigma.v) CHECK(v == 0.0);
  CHECK(r.boundary_report.max_abs_sigma == 0.0);
  CHECK(r.boundary_report.max_abs_dn_sigma == 0.0);
}

TEST_CASE("newton recovers a manufactured solution quadratically") {
  const CurvatureProblem p = manufactured_problem(64, 128);
  SolverConfig cfg;
  cfg.tol_b = 1e-12;
  cfg.cg_tol = 1e-11;
  const SolveResult r = newton_solve(p, make_seed(p.metric.g, {}), cfg);
  CHECK(r.converged);
  REQUIRE(r.history.size() == 5);

  const double expected_b[] = {1.652390e+00, 1.048627e-01, 4.226839e-04};
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(r.history[k].b_l2 - expected_b[k]) <=
          1e-5 * expected_b[k]);
  CHECK(std::abs(r.history[3].b_l2 - 7.023614e-09) <= 1e-2 * 7.023614e-09);
  CHECK(r.history[4].b_l2 <= 1e-12);
  for (std::size_t k = 1; k + 1 < r.history.size(); ++k) {
    const double bk = r.history[k].b_l2;
    CHECK(r.history[k + 1].b_l2 <= std::max(100.0 * bk * bk, 1e-13));
    CHECK(r.history[k].step_size == 1.0);
  }

  const ScalarField s = star_exponent(p.metric.g);
  CHECK(max_diff(r.sigma, s) <= 1e-12);
}

TEST_CASE("newton handles a scaled target with a collar") {
  const CurvatureProblem p = scaled_problem(0.2, 0.6, 64, 128, 0.04);
  SolverConfig cfg;
  const SolveResult r = newton_solve(p, make_seed(p.metric.g, {}), cfg);
  CHECK(r.converged);
  REQUIRE(r.history.size() == 4);
  CHECK(std::abs(r.history[1].b_l2 - 5.982436e-02) <= 1e-5 * 5.982436e-02);
  CHECK(r.history[3].b_l2 <= 1e-10);

  // achieved curvature on the plateau where chi = 1
  const ScalarField Ks = curvature_of(r.sigma, p.metric);
  const ScalarField chi = blend_cutoff(p.metric.g, p.collar_width);
  double core = 0.0;
  for (int n = 0; n < Ks.size(); ++n)
    if (chi.v[n] == 1.0 && !p.metric.g->bdry[n])
      core = std::max(core, std::abs(Ks.v[n] - p.K.v[n]));
  CHECK(core <= 1e-9);

  CHECK(r.boundary_report.max_abs_sigma == 0.0);
  CHECK(r.boundary_report.max_abs_dn_sigma ==
        doctest::Approx(2.0334).epsilon(1e-3));
  CHECK(r.boundary_report.max_abs_lap_sigma <= 0.1);
}

TEST_CASE("newton reports non-convergence when starved of iterations") {
  const CurvatureProblem p = scaled_problem(0.2, 0.6, 32, 64, 0.04);
  SolverConfig cfg;
  cfg.max_iter = 1;
  const SolveResult r = newton_solve(p, make_seed(p.metric.g, {}), cfg);
  CHECK(!r.converged);
  CHECK(r.history.size() == 2);

  SolverConfig bad;
  bad.tol_b = 0.0;
  CHECK_THROWS_AS(newton_solve(p, make_seed(p.metric.g, {}), bad),
                  std::invalid_argument);
  bad.tol_b = 1e-10;
  bad.cg_tol = -1.0;
  CHECK_THROWS_AS(gradient_descent_solve(p, make_seed(p.metric.g, {}), bad),
                  std::invalid_argument);
}

TEST_CASE("gradient descent reaches the manufactured solution monotonically") {
  const CurvatureProblem p = manufactured_problem(24, 48);
  SolverConfig cfg;
  cfg.method = SolveMethod::gradient;
  cfg.tol_b = 1e-6;
  cfg.max_iter = 300000;
  cfg.history_stride = 1000;
  const SolveResult r = solve(p, make_seed(p.metric.g, {}), cfg);
  CHECK(r.converged);
  CHECK(r.history.front().iter == 0);
  CHECK(r.history.back().iter > 1000);
  CHECK(r.history.back().b_l2 <= 1e-6);
  for (std::size_t k = 1; k < r.history.size(); ++k) {
    CHECK(r.history[k].S <= r.history[k - 1].S);
    CHECK(r.history[k].step_size > 0.0);
  }
  CHECK(max_diff(r.sigma, star_exponent(p.metric.g)) <= 1e-5);
}

TEST_CASE("make_seed variants and reproducibility") {
  const GridPtr g = build_annulus(0.3, 0.7, 16, 24);
  const ScalarField z = make_seed(g, {});
  for (double v : z.v) CHECK(v == 0.0);

  const ScalarField u = make_seed(g, {SeedSpec::Kind::uniform, 0.5, 0});
  for (int n = 0; n < g->size(); ++n)
    CHECK(u.v[n] == (g->bdry[n] ? 0.0 : 0.5));

  const ScalarField a = make_seed(g, {SeedSpec::Kind::random, 0.3, 42});
  const ScalarField b = make_seed(g, {SeedSpec::Kind::random, 0.3, 42});
  const ScalarField c = make_seed(g, {SeedSpec::Kind::random, 0.3, 43});
  double spread = 0.0;
  for (int n = 0; n < g->size(); ++n) {
    CHECK(a.v[n] == b.v[n]);
    CHECK(std::abs(a.v[n]) <= 0.3);
    if (g->bdry[n]) CHECK(a.v[n] == 0.0);
    spread = std::max(spread, std::abs(a.v[n] - c.v[n]));
  }
  CHECK(spread > 0.0);
}

TEST_CASE("solutions from different seeds coincide") {
  const CurvatureProblem p = scaled_problem(0.1, 0.9, 48, 96, 0.08);
  const GridPtr& g = p.metric.g;
  std::vector<ScalarField> seeds;
  seeds.push_back(make_seed(g, {}));
  seeds.push_back(make_seed(g, {SeedSpec::Kind::uniform, 0.5, 0}));
  seeds.push_back(make_seed(g, {SeedSpec::Kind::random, 0.3, 11}));
  seeds.push_back(make_seed(g, {SeedSpec::Kind::random, 0.8, 99}));
  SolverConfig cfg;
  cfg.tol_b = 1e-11;
  const UniquenessReport u = uniqueness_check(p, seeds, cfg);
  CHECK(u.max_pairwise <= 1e-11);
  CHECK(u.energy_residual <= 1e-15);

  CHECK_THROWS_AS(uniqueness_check(p, {}, cfg), std::invalid_argument);
}

TEST_CASE("solved exponent refines at second order") {
  auto level = [](int nr, int nt) {
    const CurvatureProblem p = scaled_problem(0.1, 0.9, nr, nt, 0.08);
    SolverConfig cfg;
    cfg.tol_b = 1e-11;
    return newton_solve(p, make_seed(p.metric.g, {}), cfg).sigma;
  };
  const ScalarField a = level(33, 64), b = level(65, 128), c = level(129, 256);
  auto coincident_diff = [](const ScalarField& coarse, const ScalarField& fine) {
    double d = 0.0;
    for (int i = 0; i < coarse.g->n1; ++i)
      for (int j = 0; j < coarse.g->n2; ++j)
        d = std::max(d, std::abs(coarse(i, j) - fine(2 * i, 2 * j)));
    return d;
  };
  const double d1 = coincident_diff(a, b), d2 = coincident_diff(b, c);
  CHECK(d2 <= 3e-4);
  CHECK(d1 / d2 >= 3.5);
}

TEST_CASE("zero extension keeps node values and reports the seam") {
  const CurvatureProblem p = scaled_problem(0.2, 0.6, 64, 128, 0.04);
  const SolveResult r = newton_solve(p, make_seed(p.metric.g, {}), {});
  const ExtendedSolution ext = extend_by_zero(r, p, 0.1);

  const GridPtr& g0 = p.metric.g;
  REQUIRE(ext.grid->kind == GridKind::annulus);
  CHECK(ext.grid->n1 == 80);
  CHECK(ext.grid->n2 == 128);
  CHECK(ext.grid->r_out == g0->r_out);
  CHECK(ext.grid->r_in == doctest::Approx(0.2 - 16.0 * g0->d1).epsilon(1e-14));
  CHECK(ext.grid->d1 == doctest::Approx(g0->d1).epsilon(1e-12));

  const int shift = ext.grid->n1 - g0->n1;
  for (int i = 0; i < g0->n1; ++i)
    for (int j = 0; j < g0->n2; ++j)
      CHECK(ext.sigma_ext(i + shift, j) == r.sigma(i, j));
  for (int i = 0; i < shift; ++i)
    for (int j = 0; j < g0->n2; ++j) CHECK(ext.sigma_ext(i, j) == 0.0);

  CHECK(ext.seam_report.sigma_jump == 0.0);
  CHECK(ext.seam_report.dn_mismatch ==
        doctest::Approx(2.0334).epsilon(1e-3));
  CHECK(ext.seam_report.dn_mismatch <=
        r.boundary_report.max_abs_dn_sigma + 1e-15);

  CHECK_THROWS_AS(extend_by_zero(r, p, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(extend_by_zero(r, p, 0.0), std::invalid_argument);

  const GridPtr rect = build_rectangle(1.0, 1.0, 16, 16);
  const ConformalMetric mflat = from_factor([&] {
    ScalarField h(rect);
    for (auto& v : h.v) v = 1.0;
    return h;
  }());
  SolveResult fake;
  fake.sigma = ScalarField(rect);
  const CurvatureProblem dummy{mflat, ScalarField(rect), 0.0};
  CHECK_THROWS_AS(extend_by_zero(fake, dummy, 0.1), std::invalid_argument);
}
