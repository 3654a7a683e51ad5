#include "prescurv/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prescurv {

namespace {

std::string node_str(const Grid& g, int n) {
  return "node (" + std::to_string(n / g.n2) + "," + std::to_string(n % g.n2) +
         ")";
}

double radial_extent(const Grid& g) {
  return g.kind == GridKind::annulus ? g.r_out - g.r_in
                                     : std::min(g.lx, g.ly);
}

}  // namespace

ScalarField blend_cutoff(const GridPtr& g, double collar_width) {
  if (!(collar_width >= 0.0))
    throw std::invalid_argument("blend_cutoff: collar_width must be >= 0");
  if (!(collar_width < 0.5 * radial_extent(*g)))
    throw std::invalid_argument(
        "blend_cutoff: collar_width must be below half the radial extent");
  ScalarField chi(g);
  const Cutoff ramp{collar_width, 2.0 * collar_width, false};
  for (int n = 0; n < g->size(); ++n) {
    const double d = g->boundary_distance(n);
    if (collar_width == 0.0)
      chi.v[n] = g->bdry[n] ? 0.0 : 1.0;
    else
      chi.v[n] = cutoff_eval(ramp, d);
  }
  return chi;
}

ScalarField blend_target(const ConformalMetric& base, const TargetSpec& spec,
                         double collar_width) {
  const GridPtr& g = base.g;
  ScalarField inner(g);
  switch (spec.kind) {
    case TargetKind::scale:
      if (!(spec.value > 0.0))
        throw std::invalid_argument("blend_target: scale factor must be > 0");
      for (int n = 0; n < g->size(); ++n)
        inner.v[n] = spec.value * base.K0.v[n];
      break;
    case TargetKind::offset:
      for (int n = 0; n < g->size(); ++n)
        inner.v[n] = base.K0.v[n] + spec.value;
      break;
    case TargetKind::field:
      require_same_grid(spec.field, base.K0, "blend_target");
      require_finite(spec.field, "blend_target");
      inner = spec.field;
      break;
  }
  const ScalarField chi = blend_cutoff(g, collar_width);
  ScalarField K(g);
  for (int n = 0; n < g->size(); ++n)
    K.v[n] = base.K0.v[n] + chi.v[n] * (inner.v[n] - base.K0.v[n]);
  for (int n = 0; n < g->size(); ++n)
    if (!(K.v[n] < 0.0))
      throw std::invalid_argument("blend_target: target not negative at " +
                                  node_str(*g, n) + ", value " +
                                  std::to_string(K.v[n]));
  return K;
}

CurvatureProblem make_problem(ConformalMetric metric, ScalarField K,
                              double collar_width) {
  require_same_grid(K, metric.h, "make_problem");
  require_finite(K, "make_problem");
  if (!(collar_width >= 0.0))
    throw std::invalid_argument("make_problem: collar_width must be >= 0");
  const Grid& g = *metric.g;
  for (int n = 0; n < g.size(); ++n)
    if (!(K.v[n] < 0.0))
      throw std::invalid_argument("make_problem: target not negative at " +
                                  node_str(g, n) + ", value " +
                                  std::to_string(K.v[n]));
  for (int n = 0; n < g.size(); ++n) {
    if (g.boundary_distance(n) > collar_width) continue;
    const double k0 = metric.K0.v[n];
    if (std::abs(K.v[n] - k0) > 1e-14 * (1.0 + std::abs(k0)))
      throw std::invalid_argument(
          "make_problem: target differs from background curvature inside the "
          "collar at " + node_str(g, n));
  }
  for (int n = 0; n < g.size(); ++n)
    if (g.bdry[n] && !(metric.K0.v[n] < 0.0))
      throw std::invalid_argument(
          "make_problem: background curvature not negative on the boundary at " +
          node_str(g, n) + ", value " + std::to_string(metric.K0.v[n]));
  return CurvatureProblem{std::move(metric), std::move(K), collar_width};
}

ScalarField laplace_beltrami(const ScalarField& f, const ConformalMetric& m) {
  require_same_grid(f, m.h, "laplace_beltrami");
  ScalarField out = flat_laplacian(f);
  for (int n = 0; n < f.size(); ++n) out.v[n] /= m.h.v[n];
  return out;
}

ScalarField curvature_of(const ScalarField& sigma, const ConformalMetric& m) {
  require_same_grid(sigma, m.h, "curvature_of");
  require_finite(sigma, "curvature_of");
  ScalarField lap = flat_laplacian(sigma);
  ScalarField K(sigma.g);
  for (int n = 0; n < sigma.size(); ++n)
    K.v[n] = std::exp(-sigma.v[n]) *
             (m.K0.v[n] - 0.5 * lap.v[n] / m.h.v[n]);
  return K;
}

namespace {

void require_zero_boundary(const ScalarField& sigma, const char* op) {
  const Grid& g = *sigma.g;
  for (int n = 0; n < g.size(); ++n)
    if (g.bdry[n] && std::abs(sigma.v[n]) > 1e-12)
      throw std::invalid_argument(std::string(op) +
                                  ": sigma nonzero on the boundary at " +
                                  node_str(g, n));
}

}  // namespace

Residual residual_b(const ScalarField& sigma, const CurvatureProblem& p) {
  require_same_grid(sigma, p.metric.h, "residual_b");
  require_finite(sigma, "residual_b");
  require_zero_boundary(sigma, "residual_b");
  const Grid& g = *sigma.g;
  const ScalarField lap = flat_laplacian(sigma);
  Residual r;
  r.b = ScalarField(sigma.g);
  for (int n = 0; n < g.size(); ++n) {
    if (g.bdry[n]) continue;  // b = K0 - K = 0 there by the collar invariant
    r.b.v[n] = p.metric.K0.v[n] - 0.5 * lap.v[n] / p.metric.h.v[n] -
               p.K.v[n] * std::exp(sigma.v[n]);
  }
  ScalarField b2(sigma.g);
  for (int n = 0; n < g.size(); ++n) b2.v[n] = r.b.v[n] * r.b.v[n];
  r.S = interior_integral(b2, p.metric.weights);
  r.b_l2 = std::sqrt(r.S);
  return r;
}

double functional_S(const ScalarField& sigma, const CurvatureProblem& p) {
  require_same_grid(sigma, p.metric.h, "functional_S");
  require_zero_boundary(sigma, "functional_S");
  const Grid& g = *sigma.g;
  const ScalarField Ks = curvature_of(sigma, p.metric);
  ScalarField integrand(sigma.g);
  for (int n = 0; n < g.size(); ++n) {
    const double diff = Ks.v[n] - p.K.v[n];
    integrand.v[n] = diff * diff * std::exp(2.0 * sigma.v[n]);
  }
  return interior_integral(integrand, p.metric.weights);
}

ScalarField gradient_S(const ScalarField& sigma, const CurvatureProblem& p) {
  const Residual r = residual_b(sigma, p);
  const Grid& g = *sigma.g;
  const ScalarField lap_b = flat_laplacian(r.b);
  ScalarField grad(sigma.g);
  for (int n = 0; n < g.size(); ++n) {
    if (g.bdry[n]) continue;
    grad.v[n] = -lap_b.v[n] / p.metric.h.v[n] -
                2.0 * p.K.v[n] * std::exp(sigma.v[n]) * r.b.v[n];
  }
  return grad;
}

double domain_area(const ConformalMetric& m) {
  ScalarField one(m.g);
  for (double& x : one.v) x = 1.0;
  return integrate(one, m.weights);
}

}  // namespace prescurv
