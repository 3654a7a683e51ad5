#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "prescurv/spectral.hpp"

using namespace prescurv;

namespace {

constexpr double pi = std::numbers::pi;

double dmu_norm(const ScalarField& f, const ConformalMetric& m) {
  return std::sqrt(inner_product(f, f, m.weights));
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double d = 0.0;
  for (int n = 0; n < a.size(); ++n)
    d = std::max(d, std::abs(a.v[n] - b.v[n]));
  return d;
}

ScalarField neg_lap_h(const ScalarField& f, const ConformalMetric& m) {
  ScalarField out(f.g);
  flat_laplacian_into(*f.g, f.v.data(), out.v.data());
  for (int n = 0; n < f.size(); ++n)
    out.v[n] = f.g->bdry[n] ? 0.0 : -out.v[n] / m.h.v[n];
  return out;
}

}  // namespace

TEST_CASE("flat square spectrum matches the discrete closed form") {
  const ConformalMetric m = flat_metric(build_rectangle(1.0, 1.0, 65, 65));
  const Spectrum s = dirichlet_eigenpairs(m, 5);
  REQUIRE(s.pairs.size() == 5);

  const double dx = 1.0 / 64.0;
  auto mode = [&](int k) {
    const double v = std::sin(k * pi * dx / 2.0);
    return 4.0 / (dx * dx) * v * v;
  };
  const double exact[5] = {mode(1) + mode(1), mode(1) + mode(2),
                           mode(2) + mode(1), mode(2) + mode(2),
                           mode(1) + mode(3)};
  for (int e = 0; e < 5; ++e) {
    CHECK(std::abs(s.pairs[e].lambda - exact[e]) <= 1e-8 * exact[e]);
    if (e > 0) CHECK(s.pairs[e].lambda >= s.pairs[e - 1].lambda);
  }
  // continuum limit 2 pi^2 within half a percent at this spacing
  CHECK(std::abs(exact[0] - 2.0 * pi * pi) <= 5e-3 * 2.0 * pi * pi);

  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const double ip = inner_product(s.pairs[a].phi, s.pairs[b].phi, m.weights);
      CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) <= 1e-10);
    }

  for (const EigenPair& pr : s.pairs) {
    const ScalarField y = neg_lap_h(pr.phi, m);
    ScalarField rf(m.g);
    for (int n = 0; n < rf.size(); ++n)
      rf.v[n] = y.v[n] - pr.lambda * pr.phi.v[n];
    CHECK(dmu_norm(rf, m) <= 1e-8 * pr.lambda);
    const double rayleigh = inner_product(y, pr.phi, m.weights);
    CHECK(std::abs(rayleigh - pr.lambda) <= 1e-10 * pr.lambda);
    for (int n = 0; n < rf.size(); ++n)
      if (m.g->bdry[n]) CHECK(pr.phi.v[n] == 0.0);
  }

  // ground state has a single sign on the interior
  double lo = 1e300, hi = -1e300;
  for (int n = 0; n < m.g->size(); ++n)
    if (!m.g->bdry[n]) {
      lo = std::min(lo, s.pairs[0].phi.v[n]);
      hi = std::max(hi, s.pairs[0].phi.v[n]);
    }
  CHECK(lo * hi > 0.0);
}

TEST_CASE("cusp annulus ground eigenvalue is reproducible") {
  const ConformalMetric m = cusp_metric(build_annulus(0.1, 0.9, 48, 96));
  const Spectrum s = dirichlet_eigenpairs(m, 2);
  CHECK(std::abs(s.pairs[0].lambda - 1.28715719) <= 1e-6 * 1.28715719);
  CHECK(std::abs(s.pairs[1].lambda - 1.66584227) <= 1e-6 * 1.66584227);
  CHECK(s.pairs[0].lambda > 0.0);
  const double cross =
      inner_product(s.pairs[0].phi, s.pairs[1].phi, m.weights);
  CHECK(std::abs(cross) <= 1e-10);
}

TEST_CASE("green operator inverts the laplacian and scales eigenmodes") {
  const ConformalMetric m = cusp_metric(build_annulus(0.1, 0.9, 48, 96));

  ScalarField zero(m.g);
  const ScalarField gz = green_apply(m, zero);
  for (double v : gz.v) CHECK(v == 0.0);

  ScalarField u(m.g);
  for (int i = 0; i < m.g->n1; ++i)
    for (int j = 0; j < m.g->n2; ++j)
      u(i, j) = std::sin(pi * (m.g->c1[i] - 0.1) / 0.8) *
                (1.0 + 0.3 * std::sin(m.g->c2[j]));
  for (int n = 0; n < u.size(); ++n)
    if (m.g->bdry[n]) u.v[n] = 0.0;
  const ScalarField rec = green_apply(m, neg_lap_h(u, m));
  CHECK(max_abs_diff(rec, u) <= 1e-10);

  const Spectrum s = dirichlet_eigenpairs(m, 1);
  const ScalarField gp = green_apply(m, s.pairs[0].phi);
  ScalarField pred = s.pairs[0].phi;
  for (auto& v : pred.v) v /= s.pairs[0].lambda;
  CHECK(max_abs_diff(gp, pred) <= 1e-8);

  ScalarField bad(m.g);
  bad.v[m.g->index(5, 5)] = std::nan("");
  CHECK_THROWS(green_apply(m, bad));
}

TEST_CASE("green image of a modal combination follows the expansion") {
  const ConformalMetric m = flat_metric(build_rectangle(1.0, 1.0, 65, 65));
  const Spectrum s = dirichlet_eigenpairs(m, 5);
  ScalarField f(m.g), pred(m.g);
  for (int n = 0; n < f.size(); ++n) {
    f.v[n] = s.pairs[0].phi.v[n] + 0.3 * s.pairs[4].phi.v[n];
    pred.v[n] = s.pairs[0].phi.v[n] / s.pairs[0].lambda +
                0.3 * s.pairs[4].phi.v[n] / s.pairs[4].lambda;
  }
  const ScalarField Gf = green_apply(m, f);
  double scale = 0.0;
  for (double v : pred.v) scale = std::max(scale, std::abs(v));
  CHECK(max_abs_diff(Gf, pred) <= 1e-6 * scale);
}

TEST_CASE("green norm bound holds on random trial data") {
  const ConformalMetric m = cusp_metric(build_annulus(0.1, 0.9, 48, 96));
  const GreenBoundReport r = green_bound_check(m, 20);
  CHECK(r.ok());
  CHECK(r.trials == 20);
  CHECK(std::abs(r.lambda1 - 1.28715719) <= 1e-6 * 1.28715719);
  CHECK(r.bound == std::max(1.0, 1.0 / r.lambda1));
  // sharper than the reported bound: the operator norm of G is 1/lambda1
  CHECK(r.max_ratio <= 1.0 / r.lambda1 + 1e-8);
  CHECK(r.max_energy_residual <= 1e-6);
  CHECK(r.max_cs_slack <= 1e-8);
  CHECK(std::abs(dmu_norm(r.worst_tau, m) - 1.0) <= 1e-12);

  CHECK_THROWS_AS(green_bound_check(m, 0), std::invalid_argument);
}

TEST_CASE("eigenvalues scale inversely with a constant factor") {
  const ConformalMetric m = poincare_metric(build_annulus(0.1, 0.8, 33, 48));
  ScalarField h3(m.g);
  for (int n = 0; n < h3.size(); ++n) h3.v[n] = 3.0 * m.h.v[n];
  const ConformalMetric m3 = from_factor(std::move(h3));
  const double l1 = dirichlet_eigenpairs(m, 1).pairs[0].lambda;
  const double l3 = dirichlet_eigenpairs(m3, 1).pairs[0].lambda;
  CHECK(std::abs(l3 - l1 / 3.0) <= 1e-8 * l1);
}

TEST_CASE("eigen solver rejects out-of-range requests") {
  const ConformalMetric m = flat_metric(build_rectangle(1.0, 1.0, 9, 9));
  CHECK_THROWS_AS(dirichlet_eigenpairs(m, 0), std::invalid_argument);
  // interior is 7x7 = 49 nodes; k is capped at a quarter of that
  CHECK_THROWS_AS(dirichlet_eigenpairs(m, 13), std::invalid_argument);
  CHECK(dirichlet_eigenpairs(m, 2).pairs.size() == 2);
}
