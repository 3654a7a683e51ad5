#include "prescurv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace prescurv {

namespace {

ScalarField random_interior(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField f(g);
  for (int n = 0; n < g->size(); ++n)
    if (!g->bdry[n]) f.v[n] = dist(rng);
  return f;
}

LinearOp neg_laplace_beltrami_op(const ConformalMetric& m) {
  return [&m](const ScalarField& d, ScalarField& out) {
    const Grid& g = *m.g;
    flat_laplacian_into(g, d.v.data(), out.v.data());
    for (int n = 0; n < g.size(); ++n)
      out.v[n] = g.bdry[n] ? 0.0 : -out.v[n] / m.h.v[n];
  };
}

double dmu_norm(const ScalarField& f, const ConformalMetric& m) {
  return std::sqrt(inner_product(f, f, m.weights));
}

}  // namespace

Spectrum dirichlet_eigenpairs(const ConformalMetric& m, int k,
                              const EigenOptions& opt) {
  const GridPtr g = m.g;
  int interior = 0;
  for (int n = 0; n < g->size(); ++n)
    if (!g->bdry[n]) ++interior;
  if (k < 1)
    throw std::invalid_argument("dirichlet_eigenpairs: k must be >= 1");
  if (k > interior / 4)
    throw std::invalid_argument(
        "dirichlet_eigenpairs: k exceeds interior node count / 4");

  const LinearOp apply = neg_laplace_beltrami_op(m);
  std::mt19937_64 rng(opt.seed);
  Spectrum spec;

  auto project_out = [&](ScalarField& v) {  // modified Gram-Schmidt, twice
    for (int rep = 0; rep < 2; ++rep)
      for (const auto& pr : spec.pairs) {
        const double c = inner_product(v, pr.phi, m.weights);
        for (int n = 0; n < g->size(); ++n) v.v[n] -= c * pr.phi.v[n];
      }
  };

  for (int e = 0; e < k; ++e) {
    ScalarField v = random_interior(g, rng);
    project_out(v);
    double nv = dmu_norm(v, m);
    if (!(nv > 0.0))
      throw std::runtime_error("dirichlet_eigenpairs: degenerate start vector");
    for (int n = 0; n < g->size(); ++n) v.v[n] /= nv;

    double lambda = 0.0, resid = std::numeric_limits<double>::infinity();
    ScalarField y(g), warm(g);
    int outer = 0;
    for (; outer < opt.max_outer; ++outer) {
      CgOptions copt;
      copt.tol = opt.cg_tol;
      copt.max_iter = opt.cg_max_iter;
      copt.seed = opt.seed + 1000ull * static_cast<std::uint64_t>(e) +
                  static_cast<std::uint64_t>(outer);
      if (lambda > 0.0) {
        for (int n = 0; n < g->size(); ++n) warm.v[n] = v.v[n] / lambda;
        copt.x0 = &warm;
      }
      ScalarField w = cg_solve(apply, v, m.weights, copt).x;
      project_out(w);
      const double nw = dmu_norm(w, m);
      if (!(nw > 0.0))
        throw std::runtime_error(
            "dirichlet_eigenpairs: inverse iteration collapsed at pair " +
            std::to_string(e));
      for (int n = 0; n < g->size(); ++n) w.v[n] /= nw;
      apply(w, y);  // y = -lap_h w
      lambda = inner_product(y, w, m.weights);
      ScalarField rf(g);
      for (int n = 0; n < g->size(); ++n)
        rf.v[n] = lambda * w.v[n] - y.v[n];
      resid = dmu_norm(rf, m);
      v = w;
      if (resid <= 0.5 * opt.residual_tol * lambda) break;
    }
    if (outer >= opt.max_outer)
      throw std::runtime_error(
          "dirichlet_eigenpairs: stagnation at pair " + std::to_string(e) +
          " (residual " + std::to_string(resid) + ", lambda " +
          std::to_string(lambda) + ")");
    spec.pairs.push_back({lambda, std::move(v)});
  }
  std::sort(spec.pairs.begin(), spec.pairs.end(),
            [](const EigenPair& a, const EigenPair& b) {
              return a.lambda < b.lambda;
            });
  return spec;
}

ScalarField green_apply(const ConformalMetric& m, const ScalarField& tau,
                        double cg_tol) {
  require_same_grid(tau, m.h, "green_apply");
  require_finite(tau, "green_apply");
  ScalarField rhs = tau;
  for (int n = 0; n < m.g->size(); ++n)
    if (m.g->bdry[n]) rhs.v[n] = 0.0;
  CgOptions copt;
  copt.tol = cg_tol;
  copt.max_iter = 200000;
  copt.seed = 0x6eee;
  return cg_solve(neg_laplace_beltrami_op(m), rhs, m.weights, copt).x;
}

GreenBoundReport green_bound_check(const ConformalMetric& m, int trials,
                                   const EigenOptions& opt) {
  if (trials < 1)
    throw std::invalid_argument("green_bound_check: trials must be >= 1");
  const GridPtr g = m.g;
  GreenBoundReport rep;
  rep.trials = trials;
  rep.lambda1 = dirichlet_eigenpairs(m, 1, opt).pairs[0].lambda;
  rep.bound = std::max(1.0, 1.0 / rep.lambda1);

  const LinearOp apply = neg_laplace_beltrami_op(m);
  std::mt19937_64 rng(opt.seed ^ 0xabcdefull);
  double worst_cs = -std::numeric_limits<double>::infinity();
  double worst_energy = 0.0;
  ScalarField y(g);
  for (int t = 0; t < trials; ++t) {
    ScalarField tau = random_interior(g, rng);
    const double nt = dmu_norm(tau, m);
    for (int n = 0; n < g->size(); ++n) tau.v[n] /= nt;
    const ScalarField x = green_apply(m, tau, opt.cg_tol);
    const double ratio = dmu_norm(x, m);
    if (ratio >= rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_tau = tau;
    }
    const double energy = dirichlet_energy(x);
    apply(x, y);
    const double paired = inner_product(x, y, m.weights);
    worst_energy = std::max(
        worst_energy,
        std::abs(energy - paired) / std::max(std::abs(energy), 1e-300));
    const double prod = dmu_norm(x, m) * dmu_norm(y, m);
    worst_cs = std::max(worst_cs, (energy - prod) / std::max(prod, 1e-300));
  }
  rep.max_energy_residual = worst_energy;
  rep.max_cs_slack = worst_cs;
  rep.norm_ok = rep.max_ratio <= rep.bound + 1e-8;
  rep.energy_ok = rep.max_energy_residual <= 1e-6;
  rep.cs_ok = rep.max_cs_slack <= 1e-8;
  return rep;
}

}  // namespace prescurv
