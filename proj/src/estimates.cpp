#include "prescurv/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace prescurv {

namespace {

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double term) {
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// flat gradient (fx, fy) at every node: centered in the interior, one-sided
// second-order along the off-grid direction at boundary rows; polar grids
// convert (f_r, f_theta) through the chain rule
void flat_gradient(const ScalarField& f, ScalarField& fx, ScalarField& fy) {
  const Grid& g = *f.g;
  auto d_axis1 = [&](int i, int j) {
    if (i == 0) return (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) / (2.0 * g.d1);
    if (i == g.n1 - 1)
      return (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) / (2.0 * g.d1);
    return (f(i + 1, j) - f(i - 1, j)) / (2.0 * g.d1);
  };
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      const int n = g.index(i, j);
      if (g.kind == GridKind::annulus) {
        const int jm = (j + g.n2 - 1) % g.n2;
        const int jp = (j + 1) % g.n2;
        const double fr = d_axis1(i, j);
        const double ft = (f(i, jp) - f(i, jm)) / (2.0 * g.d2);
        const double th = g.c2[j];
        const double ir = g.inv_c1[i];
        fx.v[n] = std::cos(th) * fr - std::sin(th) * ft * ir;
        fy.v[n] = std::sin(th) * fr + std::cos(th) * ft * ir;
      } else {
        fx.v[n] = d_axis1(i, j);
        if (j == 0)
          fy.v[n] =
              (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * g.d2);
        else if (j == g.n2 - 1)
          fy.v[n] =
              (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) / (2.0 * g.d2);
        else
          fy.v[n] = (f(i, j + 1) - f(i, j - 1)) / (2.0 * g.d2);
      }
    }
}

void require_negative(const ScalarField& K, const char* op) {
  const Grid& g = *K.g;
  for (int n = 0; n < g.size(); ++n)
    if (!(K.v[n] < 0.0))
      throw std::invalid_argument(
          std::string(op) + ": curvature not negative at node (" +
          std::to_string(n / g.n2) + "," + std::to_string(n % g.n2) +
          "), value " + std::to_string(K.v[n]));
}

}  // namespace

ComplexField g_field(const ScalarField& K) {
  require_finite(K, "g_field");
  require_negative(K, "g_field");
  const Grid& g = *K.g;
  ScalarField kx(K.g), ky(K.g);
  flat_gradient(K, kx, ky);
  ComplexField out;
  out.g = K.g;
  out.re.assign(g.size(), 0.0);
  out.im.assign(g.size(), 0.0);
  for (int n = 0; n < g.size(); ++n) {
    if (g.bdry[n]) continue;
    const double inv2k = 1.0 / (2.0 * std::abs(K.v[n]));
    out.re[n] = kx.v[n] * inv2k;
    out.im[n] = ky.v[n] * inv2k;
  }
  return out;
}

OmegaPartition omega_partition(const ScalarField& sigma,
                               const ScalarField& K) {
  require_same_grid(sigma, K, "omega_partition");
  require_finite(sigma, "omega_partition");
  const Grid& g = *sigma.g;
  const ComplexField gf = g_field(K);
  ScalarField sx(sigma.g), sy(sigma.g);
  flat_gradient(sigma, sx, sy);
  OmegaPartition part;
  part.g = sigma.g;
  part.label.assign(g.size(), 0);
  for (int n = 0; n < g.size(); ++n) {
    if (g.bdry[n]) continue;
    const double dz_abs = 0.5 * std::hypot(sx.v[n], sy.v[n]);
    const double abs_g = std::hypot(gf.re[n], gf.im[n]);
    std::uint8_t label;
    if (dz_abs > abs_g)
      label = 1;
    else if (std::abs(K.v[n]) * std::exp(sigma.v[n]) > abs_g * abs_g)
      label = 2;
    else
      label = 3;
    part.label[n] = label;
    if (label == 1)
      ++part.count1;
    else if (label == 2)
      ++part.count2;
    else
      ++part.count3;
  }
  return part;
}

EstimateReport b_terms_report(const ScalarField& sigma,
                              const CurvatureProblem& p) {
  require_same_grid(sigma, p.metric.h, "b_terms_report");
  const Residual res = residual_b(sigma, p);  // enforces the zero boundary
  const Grid& g = *sigma.g;
  const ConformalMetric& m = p.metric;

  EstimateReport rep;
  const OmegaPartition part = omega_partition(sigma, p.K);
  rep.omega1 = part.count1;
  rep.omega2 = part.count2;
  rep.omega3 = part.count3;
  const ComplexField gf = g_field(p.K);
  for (int n = 0; n < g.size(); ++n)
    if (!g.bdry[n])
      rep.max_abs_g = std::max(rep.max_abs_g, std::hypot(gf.re[n], gf.im[n]));
  rep.mu = domain_area(m);
  rep.eps_q = 1e-10 * rep.mu;
  rep.D2 = std::pow(rep.max_abs_g, 4) * rep.mu;

  const ScalarField lap = flat_laplacian(sigma);
  const ScalarField fw = flat_weights(sigma.g);
  ScalarField sx(sigma.g), sy(sigma.g);
  flat_gradient(sigma, sx, sy);
  ScalarField kx(sigma.g), ky(sigma.g);
  flat_gradient(p.K, kx, ky);

  // the by-parts sides integrate over the closed domain, so boundary rows
  // contribute through one-sided stencils and trapezoid edge weights
  Kahan acc[3], total, energy, k02, lhs_full, rhs_flat;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      const int n = g.index(i, j);
      const double fwq = fw.v[n] * g.q1[i] * g.q2[j];
      const double es_all = std::exp(sigma.v[n]);
      const double k_all = p.K.v[n];
      lhs_full.add(lap.v[n] * es_all * k_all * fwq);
      const double abs_k_all = -k_all;
      const double gre = kx.v[n] / (2.0 * abs_k_all);
      const double gim = ky.v[n] / (2.0 * abs_k_all);
      const double grad2 = sx.v[n] * sx.v[n] + sy.v[n] * sy.v[n];
      const double re_pair = 0.5 * (sx.v[n] * gre + sy.v[n] * gim);
      rhs_flat.add((grad2 - 4.0 * re_pair) * es_all * abs_k_all * fwq);
      if (g.bdry[n]) continue;
      const double wq = m.weights.v[n] * g.q1[i] * g.q2[j];
      const double es = es_all;
      const double lap_h = lap.v[n] / m.h.v[n];
      const double K = k_all;
      const double val = K * K * es * es + lap_h * es * K;
      acc[part.label[n] - 1].add(val * wq);
      total.add(val * wq);
      energy.add(lap_h * lap_h * wq);
      k02.add(m.K0.v[n] * m.K0.v[n] * wq);
    }
  rep.B1 = acc[0].sum;
  rep.B2 = acc[1].sum;
  rep.B3 = acc[2].sum;
  rep.identity_residual = std::abs(rep.B1 + rep.B2 + rep.B3 - total.sum);
  rep.b1_ok = rep.B1 >= -rep.eps_q;
  rep.b2_ok = rep.B2 >= -rep.eps_q;
  rep.bound_ok = std::abs(rep.B3) <= 3.0 * rep.D2 + rep.eps_q;
  rep.laplacian_energy = energy.sum;
  rep.C_proxy = std::sqrt(res.S) + std::sqrt(k02.sum);
  rep.energy_ok = rep.laplacian_energy <=
                  4.0 * (rep.C_proxy * rep.C_proxy + 3.0 * rep.D2) + rep.eps_q;

  // flat-measure boundary term of the by-parts identity
  Kahan bdry_term;
  const BoundaryTrace tr = normal_derivative(sigma);
  for (const auto& comp : tr.components) {
    for (std::size_t idx = 0; idx < comp.nodes.size(); ++idx) {
      const int n = comp.nodes[idx];
      const int i = n / g.n2, j = n % g.n2;
      double dl;
      if (g.kind == GridKind::annulus)
        dl = (comp.name == "inner" ? g.r_in : g.r_out) * g.d2;
      else
        dl = (comp.name == "bottom" || comp.name == "top") ? g.q1[i]
                                                           : g.q2[j];
      bdry_term.add(comp.values[idx] * p.K.v[n] * std::exp(sigma.v[n]) * dl);
    }
  }
  rep.boundary_term = bdry_term.sum;
  rep.by_parts_lhs = lhs_full.sum;
  rep.by_parts_rhs = rhs_flat.sum + rep.boundary_term;
  rep.by_parts_residual = std::abs(rep.by_parts_lhs - rep.by_parts_rhs);
  return rep;
}

ConvergenceReport convergence_monitor(
    const std::vector<IterationRecord>& history, double tol_b) {
  if (history.empty())
    throw std::invalid_argument("convergence_monitor: empty history");
  ConvergenceReport rep;
  rep.S_final = history.back().S;
  rep.final_s_ok = rep.S_final <= tol_b * tol_b * (1.0 + 1e-12);
  if (history.size() < 2) {
    rep.degenerate = true;
    rep.s_nonincreasing = true;
    rep.lap_tail_ok = true;
    rep.lap_tail_mean = history.back().lap_sigma_l2;
    return rep;
  }
  rep.s_nonincreasing = true;
  for (std::size_t k = 1; k < history.size(); ++k)
    if (history[k].S > history[k - 1].S * (1.0 + 1e-14)) {
      rep.s_nonincreasing = false;
      break;
    }
  const std::size_t tail = std::max<std::size_t>(2, history.size() / 4);
  double mn = std::numeric_limits<double>::infinity(), mx = -mn, sum = 0.0;
  for (std::size_t k = history.size() - tail; k < history.size(); ++k) {
    const double v = history[k].lap_sigma_l2;
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    sum += v;
  }
  rep.lap_tail_mean = sum / static_cast<double>(tail);
  rep.lap_tail_oscillation = mx - mn;
  rep.lap_tail_ok =
      rep.lap_tail_oscillation <= 0.01 * rep.lap_tail_mean + 1e-12;
  return rep;
}

}  // namespace prescurv
