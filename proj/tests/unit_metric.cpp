#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "prescurv/metric.hpp"

using namespace prescurv;

namespace {

double max_interior_err(const ScalarField& K, double target) {
  double m = 0.0;
  for (int n = 0; n < K.size(); ++n)
    if (!K.g->bdry[n]) m = std::max(m, std::abs(K.v[n] - target));
  return m;
}

// max over rings with fully centered nested stencils (two rings in from the
// boundary on each side)
double max_band_err(const ScalarField& K, double target) {
  const Grid& g = *K.g;
  double m = 0.0;
  for (int i = 2; i < g.n1 - 2; ++i)
    for (int j = 0; j < g.n2; ++j)
      m = std::max(m, std::abs(K(i, j) - target));
  return m;
}

OrthogonalMetric polar_form(const ConformalMetric& m) {
  const GridPtr& g = m.g;
  OrthogonalMetric om{g, m.h, ScalarField(g)};
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j)
      om.G(i, j) = m.h(i, j) * g->c1[i] * g->c1[i];
  return om;
}

}  // namespace

TEST_CASE("flat factor has zero curvature and flat weights") {
  const GridPtr g = build_annulus(0.5, 1.5, 16, 24);
  const ConformalMetric m = flat_metric(g);
  for (int n = 0; n < g->size(); ++n) {
    CHECK(m.K0.v[n] == 0.0);
    CHECK(m.weights.v[n] == flat_weights(g).v[n]);
  }
  ScalarField c2(g);
  for (auto& v : c2.v) v = 2.0;
  const ScalarField K = curvature_conformal(c2);
  for (int n = 0; n < g->size(); ++n) {
    if (g->bdry[n])
      CHECK(std::abs(K.v[n]) <= 1e-12);  // one-sided stencil roundoff
    else
      CHECK(K.v[n] == 0.0);
  }
}

TEST_CASE("from_factor rejects non-positive factors naming the node") {
  const GridPtr g = build_rectangle(1.0, 1.0, 9, 9);
  ScalarField h(g);
  for (auto& v : h.v) v = 1.0;
  h(4, 5) = 0.0;
  try {
    from_factor(h);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
}

TEST_CASE("cusp metric: pointwise factor and curvature near -1") {
  const GridPtr g9 = build_annulus(0.25, 0.75, 9, 8);
  const ConformalMetric m9 = cusp_metric(g9);
  const double h_half = 1.0 / std::pow(0.5 * std::log(2.0), 2);
  CHECK(h_half == doctest::Approx(8.3255).epsilon(1e-4));
  CHECK(m9.h(4, 0) == doctest::Approx(h_half).epsilon(1e-13));

  CHECK_THROWS(cusp_metric(build_annulus(0.5, 1.0, 16, 16)));

  const ConformalMetric m = cusp_metric(build_annulus(0.05, 0.5, 128, 256));
  const double e128 = max_interior_err(m.K0, -1.0);
  CHECK(e128 == doctest::Approx(5.218890e-3).epsilon(1e-3));
  const ConformalMetric f = cusp_metric(build_annulus(0.05, 0.5, 256, 512));
  const double e256 = max_interior_err(f.K0, -1.0);
  CHECK(e128 / e256 >= 3.5);
}

TEST_CASE("poincare metric curvature near -1") {
  CHECK_THROWS(poincare_metric(build_annulus(0.5, 1.0, 16, 16)));
  const ConformalMetric m = poincare_metric(build_annulus(0.1, 0.8, 128, 256));
  CHECK(max_interior_err(m.K0, -1.0) <= 1e-3);
  const ConformalMetric f = poincare_metric(build_annulus(0.1, 0.8, 256, 512));
  CHECK(max_interior_err(m.K0, -1.0) / max_interior_err(f.K0, -1.0) >= 3.5);
}

TEST_CASE("conformal scaling law") {
  const GridPtr g = build_annulus(0.1, 0.9, 32, 48);
  const ConformalMetric m = cusp_metric(g);
  const double c = 3.7;
  ScalarField ch(g);
  for (int n = 0; n < g->size(); ++n) ch.v[n] = c * m.h.v[n];
  const ScalarField Kc = curvature_conformal(ch);
  for (int n = 0; n < g->size(); ++n)
    CHECK(Kc.v[n] == doctest::Approx(m.K0.v[n] / c).epsilon(1e-12));
}

TEST_CASE("curvature cache is coherent") {
  const ConformalMetric m = poincare_metric(build_annulus(0.1, 0.8, 24, 32));
  const ScalarField fresh = curvature_conformal(m.h);
  for (int n = 0; n < m.h.size(); ++n) CHECK(m.K0.v[n] == fresh.v[n]);
}

TEST_CASE("orthogonal curvature: flat polar form vanishes") {
  const GridPtr g = build_annulus(0.1, 0.9, 128, 256);
  OrthogonalMetric om{g, ScalarField(g), ScalarField(g)};
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j) {
      om.E(i, j) = 1.0;
      om.G(i, j) = g->c1[i] * g->c1[i];
    }
  const ScalarField K = curvature_orthogonal(om, OrthSign::leading_minus);
  CHECK(max_interior_err(K, 0.0) <= 1e-10);
}

TEST_CASE("orthogonal curvature agrees with the conformal oracle") {
  const ConformalMetric m = cusp_metric(build_annulus(0.05, 0.5, 128, 256));
  const ScalarField K = curvature_orthogonal(polar_form(m), OrthSign::leading_minus);
  CHECK(max_band_err(K, -1.0) <= 1e-3);
  double diff = 0.0, conf = 0.0;
  const Grid& g = *m.g;
  for (int i = 2; i < g.n1 - 2; ++i)
    for (int j = 0; j < g.n2; ++j) {
      diff = std::max(diff, std::abs(K(i, j) - m.K0(i, j)));
      conf = std::max(conf, std::abs(m.K0(i, j) + 1.0));
    }
  CHECK(diff <= 5.0 * max_interior_err(m.K0, -1.0));
}

TEST_CASE("log4 factor values and sign conventions") {
  CHECK_THROWS(log4_metric(build_annulus(1.0, 4.0, 16, 16)));
  const GridPtr g9 = build_annulus(0.5, 2.5, 9, 8);
  const ConformalMetric m9 = log4_metric(g9);
  CHECK(m9.h(2, 0) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(m9.h(6, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const GridPtr g = build_annulus(0.5, 1.5, 129, 16);
  const ConformalMetric m = log4_metric(g);
  const double exact = 1.0 / (2.0 * std::pow(std::log(4.0), 3));
  CHECK(std::abs(m.K0(64, 0) - exact) <= 1e-3);
  CHECK(m.K0(64, 0) > 0.0);

  const OrthogonalMetric om = polar_form(m);
  const ScalarField Km = curvature_orthogonal(om, OrthSign::leading_minus);
  const ScalarField Kn = curvature_orthogonal(om, OrthSign::no_leading_minus);
  CHECK(std::abs(Km(64, 0) - exact) <= 1e-3);
  CHECK(Kn(64, 0) == doctest::Approx(-Km(64, 0)).epsilon(1e-13));
  CHECK(Kn(64, 0) < 0.0);
}

TEST_CASE("cutoff profile values and smooth plateaus") {
  const Cutoff c{1.5, 2.0, true};
  CHECK(cutoff_eval(c, 1.2) == 1.0);
  CHECK(cutoff_eval(c, 1.5) == 1.0);
  CHECK(cutoff_eval(c, 2.0) == 0.0);
  CHECK(cutoff_eval(c, 2.4) == 0.0);
  CHECK(cutoff_eval(c, 1.75) == doctest::Approx(0.5).epsilon(1e-14));

  const Cutoff up{1.5, 2.0, false};
  CHECK(cutoff_eval(up, 1.5) == 0.0);
  CHECK(cutoff_eval(up, 2.0) == 1.0);
  CHECK_THROWS(cutoff_eval(Cutoff{2.0, 1.5, true}, 1.7));

  // one-sided first difference decays at second order, second difference at
  // first order, at both plateau edges
  for (double edge : {1.5, 2.0}) {
    const double dir = edge == 1.5 ? 1.0 : -1.0;
    auto d1 = [&](double d) {
      return std::abs(cutoff_eval(c, edge + dir * d) - cutoff_eval(c, edge)) / d;
    };
    auto d2 = [&](double d) {
      return std::abs(cutoff_eval(c, edge + 2.0 * dir * d) -
                      2.0 * cutoff_eval(c, edge + dir * d) +
                      cutoff_eval(c, edge)) /
             (d * d);
    };
    CHECK(d1(5e-4) / d1(1e-3) <= 0.3);
    CHECK(d2(5e-4) / d2(1e-3) <= 0.6);
  }
}

TEST_CASE("degenerate blend returns the single piece") {
  const GridPtr g = build_annulus(1.0, 3.0, 33, 16);
  const ScalarField f1 = log4_factor(g);
  ScalarField bg(g);
  for (auto& v : bg.v) v = 1.0;
  const ConformalMetric m =
      blend_metrics({BlendPiece{f1, Cutoff{3.5, 4.0, true}}},
                    BlendPiece{bg, Cutoff{3.5, 4.0, false}});
  for (int n = 0; n < g->size(); ++n) CHECK(m.h.v[n] == f1.v[n]);
}

TEST_CASE("two-piece blend: plateaus, positivity, curvature locality") {
  const GridPtr g = build_annulus(1.0, 3.0, 65, 16);
  const ScalarField f1 = log4_factor(g);
  ScalarField bg(g);
  for (auto& v : bg.v) v = 1.0;
  const Cutoff down{1.5, 2.0, true}, up{1.5, 2.0, false};
  const ConformalMetric m =
      blend_metrics({BlendPiece{f1, down}}, BlendPiece{bg, up});

  const ConformalMetric piece = log4_metric(g);
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j) {
      const double r = g->c1[i];
      if (r <= 1.5) CHECK(m.h(i, j) == f1(i, j));
      if (r >= 2.0) CHECK(m.h(i, j) == 1.0);
      CHECK(m.h(i, j) > 0.0);
      // curvature locality needs the full stencil inside one plateau
      if (i >= 1 && i + 1 < g->n1) {
        if (g->c1[i + 1] <= 1.5) CHECK(m.K0(i, j) == piece.K0(i, j));
        if (g->c1[i - 1] >= 2.0) CHECK(m.K0(i, j) == 0.0);
      }
    }
}

TEST_CASE("blend rejects non-positive results") {
  const GridPtr g = build_annulus(1.0, 3.0, 17, 16);
  ScalarField neg(g);
  for (auto& v : neg.v) v = -1.0;
  ScalarField bg(g);
  for (auto& v : bg.v) v = 1.0;
  CHECK_THROWS(blend_metrics({BlendPiece{neg, Cutoff{3.5, 4.0, true}}},
                             BlendPiece{bg, Cutoff{3.5, 4.0, false}}));
}
