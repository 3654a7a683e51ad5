#include "prescurv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace prescurv {

namespace {

ScalarField random_interior(const GridPtr& g, std::mt19937_64& rng,
                            double amp) {
  std::uniform_real_distribution<double> dist(-amp, amp);
  ScalarField f(g);
  for (int n = 0; n < g->size(); ++n)
    if (!g->bdry[n]) f.v[n] = dist(rng);
  return f;
}

void spot_check_operator(const LinearOp& apply, const GridPtr& g,
                         const ScalarField& w, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  ScalarField Au(g), Av(g);
  for (int pair = 0; pair < 3; ++pair) {
    const ScalarField u = random_interior(g, rng, 1.0);
    const ScalarField v = random_interior(g, rng, 1.0);
    apply(u, Au);
    apply(v, Av);
    const double auv = inner_product(Au, v, w);
    const double uav = inner_product(u, Av, w);
    if (std::abs(auv - uav) > 1e-10 * (std::abs(auv) + std::abs(uav) + 1e-300))
      throw std::runtime_error(
          "cg_solve: operator fails the self-adjointness spot check");
    if (!(inner_product(Au, u, w) > 0.0))
      throw std::runtime_error(
          "cg_solve: operator fails the positivity spot check");
  }
}

double lap_h_l2(const ScalarField& sigma, const ConformalMetric& m) {
  const ScalarField lap = flat_laplacian(sigma);
  ScalarField sq(sigma.g);
  for (int n = 0; n < sigma.size(); ++n) {
    if (sigma.g->bdry[n]) continue;
    const double t = lap.v[n] / m.h.v[n];
    sq.v[n] = t * t;
  }
  return std::sqrt(interior_integral(sq, m.weights));
}

double dmu_norm(const ScalarField& f, const ConformalMetric& m) {
  return std::sqrt(inner_product(f, f, m.weights));
}

BoundaryReport boundary_report_of(const ScalarField& sigma,
                                  const ConformalMetric& m) {
  BoundaryReport rep;
  const Grid& g = *sigma.g;
  const ScalarField lap = flat_laplacian(sigma);
  for (int n = 0; n < g.size(); ++n) {
    if (!g.bdry[n]) continue;
    rep.max_abs_sigma = std::max(rep.max_abs_sigma, std::abs(sigma.v[n]));
    rep.max_abs_lap_sigma =
        std::max(rep.max_abs_lap_sigma, std::abs(lap.v[n] / m.h.v[n]));
  }
  const BoundaryTrace tr = normal_derivative(sigma);
  for (const auto& comp : tr.components)
    for (double val : comp.values)
      rep.max_abs_dn_sigma = std::max(rep.max_abs_dn_sigma, std::abs(val));
  return rep;
}

void check_tols(const SolverConfig& cfg, const char* op) {
  if (!(cfg.tol_b > 0.0))
    throw std::invalid_argument(std::string(op) + ": tol_b must be positive");
  if (!(cfg.cg_tol > 0.0))
    throw std::invalid_argument(std::string(op) + ": cg_tol must be positive");
}

}  // namespace

CgResult cg_solve(const LinearOp& apply, const ScalarField& rhs,
                  const ScalarField& weights, const CgOptions& opt) {
  require_same_grid(rhs, weights, "cg_solve");
  const GridPtr g = rhs.g;
  spot_check_operator(apply, g, weights, opt.seed);

  CgResult out;
  out.x = ScalarField(g);
  const double rhs2 = inner_product(rhs, rhs, weights);
  if (rhs2 == 0.0) return out;
  const double target2 = opt.tol * opt.tol * rhs2;

  ScalarField r(g), p(g), Ap(g);
  if (opt.x0) {
    require_same_grid(*opt.x0, rhs, "cg_solve");
    out.x = *opt.x0;
    for (int n = 0; n < g->size(); ++n)
      if (g->bdry[n]) out.x.v[n] = 0.0;
  }
  auto true_residual = [&]() {
    apply(out.x, Ap);
    for (int n = 0; n < g->size(); ++n) r.v[n] = rhs.v[n] - Ap.v[n];
    return inner_product(r, r, weights);
  };

  double rr = true_residual();
  // recurrence loop, then a true-residual check; one restart allowed
  for (int attempt = 0; attempt < 2 && rr > target2; ++attempt) {
    p = r;
    double rec = rr;
    while (rec > 0.25 * target2 && out.iters < opt.max_iter) {
      apply(p, Ap);
      const double pAp = inner_product(p, Ap, weights);
      if (!(pAp > 0.0))
        throw std::runtime_error(
            "cg_solve: operator not positive definite along a search "
            "direction");
      const double alpha = rec / pAp;
      for (int n = 0; n < g->size(); ++n) {
        out.x.v[n] += alpha * p.v[n];
        r.v[n] -= alpha * Ap.v[n];
      }
      const double rec_new = inner_product(r, r, weights);
      const double beta = rec_new / rec;
      rec = rec_new;
      ++out.iters;
      if (rec <= 0.25 * target2) break;
      for (int n = 0; n < g->size(); ++n) p.v[n] = r.v[n] + beta * p.v[n];
    }
    rr = true_residual();
  }
  out.rel_residual = std::sqrt(rr / rhs2);
  if (rr > target2)
    throw std::runtime_error(
        out.iters >= opt.max_iter
            ? "cg_solve: no convergence within cg_max_iter (relative residual " +
                  std::to_string(out.rel_residual) + ")"
            : "cg_solve: residual target not reached after restart");
  return out;
}

SolveResult newton_solve(const CurvatureProblem& p, const ScalarField& sigma0,
                         const SolverConfig& cfg) {
  check_tols(cfg, "newton_solve");
  require_same_grid(sigma0, p.metric.h, "newton_solve");
  const GridPtr g = p.metric.g;

  SolveResult out;
  out.sigma = sigma0;
  Residual res = residual_b(out.sigma, p);
  ScalarField grad = gradient_S(out.sigma, p);
  out.history.push_back({0, res.S, res.b_l2, dmu_norm(grad, p.metric), 0.0,
                         lap_h_l2(out.sigma, p.metric)});

  int iter = 0;
  ScalarField trial(g);
  while (res.b_l2 > cfg.tol_b && iter < cfg.max_iter) {
    ScalarField c(g);  // -K e^sigma, positive
    for (int n = 0; n < g->size(); ++n)
      if (!g->bdry[n]) c.v[n] = -p.K.v[n] * std::exp(out.sigma.v[n]);
    const ScalarField& h = p.metric.h;
    LinearOp apply = [&](const ScalarField& d, ScalarField& outv) {
      flat_laplacian_into(*g, d.v.data(), outv.v.data());
      for (int n = 0; n < g->size(); ++n)
        outv.v[n] =
            g->bdry[n] ? 0.0 : -0.5 * outv.v[n] / h.v[n] + c.v[n] * d.v[n];
    };
    ScalarField rhs(g);
    for (int n = 0; n < g->size(); ++n)
      if (!g->bdry[n]) rhs.v[n] = -res.b.v[n];
    CgOptions copt;
    copt.tol = cfg.cg_tol;
    copt.max_iter = cfg.cg_max_iter;
    copt.seed = cfg.seed + 7919ull * static_cast<std::uint64_t>(iter + 1);
    const CgResult cg = cg_solve(apply, rhs, p.metric.weights, copt);

    const double gdotd = inner_product(grad, cg.x, p.metric.weights);
    double t = 1.0;
    bool accepted = false;
    Residual tres;
    for (int halvings = 0; halvings <= cfg.max_halvings; ++halvings) {
      for (int n = 0; n < g->size(); ++n)
        trial.v[n] = out.sigma.v[n] + t * cg.x.v[n];
      tres = residual_b(trial, p);
      if (tres.S <= res.S + cfg.armijo_c1 * t * gdotd) {
        accepted = true;
        break;
      }
      t *= cfg.backtrack;
    }
    if (!accepted)
      throw std::runtime_error("newton_solve: line search failed after " +
                               std::to_string(cfg.max_halvings) + " halvings");
    out.sigma.v.swap(trial.v);
    res = tres;
    ++iter;
    grad = gradient_S(out.sigma, p);
    out.history.push_back({iter, res.S, res.b_l2, dmu_norm(grad, p.metric), t,
                           lap_h_l2(out.sigma, p.metric)});
  }
  out.converged = res.b_l2 <= cfg.tol_b;
  out.boundary_report = boundary_report_of(out.sigma, p.metric);
  return out;
}

SolveResult gradient_descent_solve(const CurvatureProblem& p,
                                   const ScalarField& sigma0,
                                   const SolverConfig& cfg) {
  check_tols(cfg, "gradient_descent_solve");
  require_same_grid(sigma0, p.metric.h, "gradient_descent_solve");
  const GridPtr g = p.metric.g;
  const int stride = std::max(1, cfg.history_stride);

  SolveResult out;
  out.sigma = sigma0;
  Residual res = residual_b(out.sigma, p);
  ScalarField grad = gradient_S(out.sigma, p);
  double gn2 = inner_product(grad, grad, p.metric.weights);
  out.history.push_back({0, res.S, res.b_l2, std::sqrt(gn2), 0.0,
                         lap_h_l2(out.sigma, p.metric)});

  int iter = 0;
  double t_warm = 0.5;
  ScalarField trial(g);
  while (res.b_l2 > cfg.tol_b && iter < cfg.max_iter) {
    double t = 2.0 * t_warm;
    bool accepted = false;
    Residual tres;
    for (int halvings = 0; halvings <= cfg.max_halvings; ++halvings) {
      for (int n = 0; n < g->size(); ++n)
        trial.v[n] = out.sigma.v[n] - t * grad.v[n];
      tres = residual_b(trial, p);
      if (tres.S <= res.S - cfg.armijo_c1 * t * gn2) {
        accepted = true;
        break;
      }
      t *= cfg.backtrack;
    }
    if (!accepted)
      throw std::runtime_error(
          "gradient_descent_solve: line search failed after " +
          std::to_string(cfg.max_halvings) + " halvings");
    out.sigma.v.swap(trial.v);
    res = tres;
    t_warm = t;
    ++iter;
    grad = gradient_S(out.sigma, p);
    gn2 = inner_product(grad, grad, p.metric.weights);
    if (iter % stride == 0 || res.b_l2 <= cfg.tol_b || iter >= cfg.max_iter)
      out.history.push_back({iter, res.S, res.b_l2, std::sqrt(gn2), t,
                             lap_h_l2(out.sigma, p.metric)});
  }
  if (out.history.back().iter != iter)
    out.history.push_back({iter, res.S, res.b_l2, std::sqrt(gn2), t_warm,
                           lap_h_l2(out.sigma, p.metric)});
  out.converged = res.b_l2 <= cfg.tol_b;
  out.boundary_report = boundary_report_of(out.sigma, p.metric);
  return out;
}

SolveResult solve(const CurvatureProblem& p, const ScalarField& sigma0,
                  const SolverConfig& cfg) {
  return cfg.method == SolveMethod::newton
             ? newton_solve(p, sigma0, cfg)
             : gradient_descent_solve(p, sigma0, cfg);
}

ScalarField make_seed(const GridPtr& g, const SeedSpec& s) {
  ScalarField f(g);
  switch (s.kind) {
    case SeedSpec::Kind::zeros:
      break;
    case SeedSpec::Kind::uniform:
      for (int n = 0; n < g->size(); ++n)
        if (!g->bdry[n]) f.v[n] = s.amplitude;
      break;
    case SeedSpec::Kind::random: {
      std::mt19937_64 rng(s.rng_seed);
      std::uniform_real_distribution<double> dist(-s.amplitude, s.amplitude);
      for (int n = 0; n < g->size(); ++n)
        if (!g->bdry[n]) f.v[n] = dist(rng);
      break;
    }
  }
  return f;
}

UniquenessReport uniqueness_check(const CurvatureProblem& p,
                                  const std::vector<ScalarField>& seeds,
                                  const SolverConfig& cfg) {
  if (seeds.empty())
    throw std::invalid_argument("uniqueness_check: at least one seed required");
  std::vector<ScalarField> sols;
  sols.reserve(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    SolveResult r = solve(p, seeds[k], cfg);
    if (!r.converged)
      throw std::runtime_error("uniqueness_check: seed " + std::to_string(k) +
                               " failed to converge");
    sols.push_back(std::move(r.sigma));
  }

  UniquenessReport rep;
  std::size_t ia = 0, ib = 0;
  for (std::size_t a = 0; a < sols.size(); ++a)
    for (std::size_t b = a + 1; b < sols.size(); ++b) {
      double d = 0.0;
      for (int n = 0; n < sols[a].size(); ++n)
        d = std::max(d, std::abs(sols[a].v[n] - sols[b].v[n]));
      if (d >= rep.max_pairwise) {
        rep.max_pairwise = d;
        ia = a;
        ib = b;
      }
    }

  const GridPtr g = p.metric.g;
  ScalarField zeta(g), rhsf(g);
  for (int n = 0; n < g->size(); ++n)
    zeta.v[n] = sols[ia].v[n] - sols[ib].v[n];
  rep.energy_lhs = dirichlet_energy(zeta);
  for (int n = 0; n < g->size(); ++n)
    if (!g->bdry[n])
      rhsf.v[n] = 2.0 * p.K.v[n] *
                  (std::exp(sols[ia].v[n]) - std::exp(sols[ib].v[n]));
  rep.energy_rhs = inner_product(rhsf, zeta, p.metric.weights);
  rep.energy_residual = std::abs(rep.energy_lhs - rep.energy_rhs);
  return rep;
}

ExtendedSolution extend_by_zero(const SolveResult& res,
                                const CurvatureProblem& p,
                                double r_extension) {
  (void)p;
  const GridPtr g0 = res.sigma.g;
  if (g0->kind != GridKind::annulus)
    throw std::invalid_argument(
        "extend_by_zero: annulus domain required (rectangles have no excised "
        "disc)");
  if (!(r_extension > 0.0) || !(r_extension < g0->r_in))
    throw std::invalid_argument(
        "extend_by_zero: r_extension must lie in (0, r_in)");
  const double dr = g0->d1;
  int n_ext =
      static_cast<int>(std::ceil((g0->r_in - r_extension) / dr - 1e-9));
  if (n_ext < 1) n_ext = 1;
  const double new_r_in = g0->r_in - n_ext * dr;
  if (!(new_r_in > 0.0))
    throw std::invalid_argument(
        "extend_by_zero: r_extension too close to zero for the grid spacing");

  ExtendedSolution ext;
  ext.grid = build_annulus(new_r_in, g0->r_out, g0->n1 + n_ext, g0->n2);
  ext.sigma_ext = ScalarField(ext.grid);
  for (int i = 0; i < g0->n1; ++i)
    for (int j = 0; j < g0->n2; ++j)
      ext.sigma_ext(i + n_ext, j) = res.sigma(i, j);

  for (int j = 0; j < g0->n2; ++j)
    ext.seam_report.sigma_jump =
        std::max(ext.seam_report.sigma_jump, std::abs(res.sigma(0, j)));
  const BoundaryTrace tr = normal_derivative(res.sigma);
  for (const auto& comp : tr.components)
    if (comp.name == "inner")
      for (double val : comp.values)
        ext.seam_report.dn_mismatch =
            std::max(ext.seam_report.dn_mismatch, std::abs(val));
  return ext;
}

}  // namespace prescurv
