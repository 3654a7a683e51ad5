#include "prescurv/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace prescurv {

namespace {

void require_positive(const ScalarField& h, const char* op) {
  const Grid& g = *h.g;
  for (int n = 0; n < h.size(); ++n) {
    if (!std::isfinite(h.v[n]) || h.v[n] <= 0.0)
      throw std::invalid_argument(std::string(op) + ": factor not positive at node " +
                                  std::to_string(n / g.n2) + "," + std::to_string(n % g.n2) +
                                  " (value " + std::to_string(h.v[n]) + ")");
  }
}

void require_annulus(const GridPtr& g, const char* op) {
  if (!g || g->kind != GridKind::annulus)
    throw std::invalid_argument(std::string(op) + ": annulus grid required");
}

}  // namespace

ScalarField curvature_conformal(const ScalarField& h) {
  require_positive(h, "curvature_conformal");
  ScalarField logh(h.g);
  for (int n = 0; n < h.size(); ++n) logh.v[n] = std::log(h.v[n]);
  ScalarField lap = flat_laplacian(logh);
  ScalarField K(h.g);
  for (int n = 0; n < h.size(); ++n) K.v[n] = -lap.v[n] / (2.0 * h.v[n]);
  require_finite(K, "curvature_conformal");
  return K;
}

ConformalMetric from_factor(ScalarField h) {
  require_positive(h, "from_factor");
  ConformalMetric m;
  m.g = h.g;
  m.K0 = curvature_conformal(h);
  m.weights = flat_weights(h.g);
  for (int n = 0; n < h.size(); ++n) m.weights.v[n] *= h.v[n];
  m.h = std::move(h);
  return m;
}

ConformalMetric flat_metric(const GridPtr& g) {
  ScalarField h(g);
  for (double& x : h.v) x = 1.0;
  return from_factor(std::move(h));
}

ScalarField cusp_factor(const GridPtr& g) {
  require_annulus(g, "cusp_factor");
  if (!(g->r_out < 1.0))
    throw std::invalid_argument("cusp_factor: requires r_out < 1");
  ScalarField h(g);
  for (int i = 0; i < g->n1; ++i) {
    double r = g->c1[i];
    double t = r * std::log(1.0 / r);
    double val = 1.0 / (t * t);
    for (int j = 0; j < g->n2; ++j) h(i, j) = val;
  }
  return h;
}

ConformalMetric cusp_metric(const GridPtr& g) { return from_factor(cusp_factor(g)); }

ScalarField poincare_factor(const GridPtr& g) {
  require_annulus(g, "poincare_factor");
  if (!(g->r_out < 1.0))
    throw std::invalid_argument("poincare_factor: requires r_out < 1");
  ScalarField h(g);
  for (int i = 0; i < g->n1; ++i) {
    double r = g->c1[i];
    double t = 1.0 - r * r;
    double val = 4.0 / (t * t);
    for (int j = 0; j < g->n2; ++j) h(i, j) = val;
  }
  return h;
}

ConformalMetric poincare_metric(const GridPtr& g) { return from_factor(poincare_factor(g)); }

ScalarField log4_factor(const GridPtr& g) {
  require_annulus(g, "log4_factor");
  if (!(g->r_out < 4.0))
    throw std::invalid_argument("log4_factor: requires r_out < 4");
  ScalarField h(g);
  for (int i = 0; i < g->n1; ++i) {
    double val = std::log(4.0 / g->c1[i]);
    for (int j = 0; j < g->n2; ++j) h(i, j) = val;
  }
  return h;
}

ConformalMetric log4_metric(const GridPtr& g) { return from_factor(log4_factor(g)); }

ScalarField curvature_orthogonal(const OrthogonalMetric& m, OrthSign sign) {
  require_annulus(m.g, "curvature_orthogonal");
  require_same_grid(m.E, m.G, "curvature_orthogonal");
  require_positive(m.E, "curvature_orthogonal");
  require_positive(m.G, "curvature_orthogonal");
  const Grid& g = *m.g;
  const int n1 = g.n1, n2 = g.n2;
  const double inv_2d1 = 1.0 / (2.0 * g.d1);
  const double inv_2d2 = 1.0 / (2.0 * g.d2);

  ScalarField sq(m.g);  // sqrt(EG)
  for (int n = 0; n < sq.size(); ++n) sq.v[n] = std::sqrt(m.E.v[n] * m.G.v[n]);

  auto d1 = [&](const ScalarField& f, int i, int j) {
    if (i == 0) return (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) * inv_2d1;
    if (i == n1 - 1) return (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) * inv_2d1;
    return (f(i + 1, j) - f(i - 1, j)) * inv_2d1;
  };
  auto d2 = [&](const ScalarField& f, int i, int j) {
    int jm = (j == 0) ? n2 - 1 : j - 1;
    int jp = (j == n2 - 1) ? 0 : j + 1;
    return (f(i, jp) - f(i, jm)) * inv_2d2;
  };

  ScalarField F1(m.g), F2(m.g);  // E_theta/sqrt(EG), G_r/sqrt(EG)
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      F1(i, j) = d2(m.E, i, j) / sq(i, j);
      F2(i, j) = d1(m.G, i, j) / sq(i, j);
    }

  ScalarField K(m.g);
  const double s = (sign == OrthSign::leading_minus) ? -1.0 : 1.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      K(i, j) = s * (d2(F1, i, j) + d1(F2, i, j)) / (2.0 * sq(i, j));
  require_finite(K, "curvature_orthogonal");
  return K;
}

double cutoff_eval(const Cutoff& c, double r) {
  if (!(c.b > c.a)) throw std::invalid_argument("cutoff_eval: requires b > a");
  double t = (r - c.a) / (c.b - c.a);
  double s;
  if (t <= 0.0)
    s = 0.0;
  else if (t >= 1.0)
    s = 1.0;
  else
    s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  return c.decreasing ? 1.0 - s : s;
}

ConformalMetric blend_metrics(const std::vector<BlendPiece>& pieces,
                              const BlendPiece& background) {
  require_annulus(background.factor.g, "blend_metrics");
  const GridPtr& g = background.factor.g;
  for (const auto& p : pieces)
    require_same_grid(p.factor, background.factor, "blend_metrics");
  ScalarField h(g);
  for (int i = 0; i < g->n1; ++i) {
    double r = g->c1[i];
    double rho_bg = cutoff_eval(background.rho, r);
    for (int j = 0; j < g->n2; ++j) {
      double acc = rho_bg * background.factor(i, j);
      for (const auto& p : pieces)
        acc += cutoff_eval(p.rho, r) * p.factor(i, j);
      h(i, j) = acc;
    }
  }
  for (int n = 0; n < h.size(); ++n)
    if (!(h.v[n] > 0.0))
      throw std::invalid_argument(
          "blend_metrics: blended factor not positive at node " +
          std::to_string(n / g->n2) + "," + std::to_string(n % g->n2) +
          " (value " + std::to_string(h.v[n]) + ")");
  return from_factor(std::move(h));
}

}  // namespace prescurv
