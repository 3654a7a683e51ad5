#pragma once

// Minimization of S: Newton iteration on the Euler-Lagrange equation
// (1/2) lap_h sigma = K0 - K e^sigma and plain gradient descent on S, both
// with Armijo backtracking.  Also the uniqueness cross-check between solves
// from different seeds and the zero-extension of a solution across the inner
// boundary.  All linear solves go through a matrix-free conjugate gradient
// in the dmu inner product that spot-checks self-adjointness and
// definiteness of the supplied operator.

#include <cstdint>
#include <functional>

#include "prescurv/problem.hpp"

namespace prescurv {

enum class SolveMethod { newton, gradient };

struct SolverConfig {
  SolveMethod method = SolveMethod::newton;
  double tol_b = 1e-10;  // stop when b_l2 <= tol_b
  int max_iter = 50;
  double cg_tol = 1e-12;
  int cg_max_iter = 50000;
  // Armijo backtracking
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_halvings = 40;
  std::uint64_t seed = 0;  // symmetry spot checks and random seeds
  int history_stride = 1;  // gradient descent records every k-th iteration
};

struct IterationRecord {
  int iter = 0;
  double S = 0.0;
  double b_l2 = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;
  double lap_sigma_l2 = 0.0;  // ||lap_h sigma||_dmu
};

struct BoundaryReport {
  double max_abs_sigma = 0.0;
  double max_abs_dn_sigma = 0.0;
  double max_abs_lap_sigma = 0.0;
};

struct SolveResult {
  ScalarField sigma;
  std::vector<IterationRecord> history;
  bool converged = false;
  BoundaryReport boundary_report;
};

// interior linear operator: input and output vanish on boundary nodes
using LinearOp = std::function<void(const ScalarField&, ScalarField&)>;

struct CgOptions {
  double tol = 1e-12;  // relative dmu-residual target
  int max_iter = 50000;
  std::uint64_t seed = 0;           // for the self-adjointness spot check
  const ScalarField* x0 = nullptr;  // warm start (copied), else zero
};

struct CgResult {
  ScalarField x;
  int iters = 0;
  double rel_residual = 0.0;
};

// conjugate gradient in the weighted inner product sum f*g*w*quadrature;
// asserts self-adjointness and positivity of `apply` on 3 random pairs, and
// verifies the true residual before returning.  Throws on non-convergence,
// detected asymmetry, or indefiniteness.
CgResult cg_solve(const LinearOp& apply, const ScalarField& rhs,
                  const ScalarField& weights, const CgOptions& opt);

// Newton on b: solve (-1/2 lap_h - K e^sigma) delta = -b, sigma += t*delta
// with Armijo damping on S.  Returns converged = false when max_iter runs
// out; throws on CG or line-search failure.
SolveResult newton_solve(const CurvatureProblem& p, const ScalarField& sigma0,
                         const SolverConfig& cfg);

// sigma_{n+1} = sigma_n - t * gradient_S(sigma_n), Armijo with warm-started
// step; history thinned to every cfg.history_stride-th iteration (first and
// last always kept)
SolveResult gradient_descent_solve(const CurvatureProblem& p,
                                   const ScalarField& sigma0,
                                   const SolverConfig& cfg);

// dispatch on cfg.method
SolveResult solve(const CurvatureProblem& p, const ScalarField& sigma0,
                  const SolverConfig& cfg);

struct SeedSpec {
  enum class Kind { zeros, uniform, random };
  Kind kind = Kind::zeros;
  double amplitude = 0.0;       // uniform value or random range half-width
  std::uint64_t rng_seed = 0;   // for Kind::random
};

// interior-supported initial guess (boundary rows zero)
ScalarField make_seed(const GridPtr& g, const SeedSpec& s);

struct UniquenessReport {
  double max_pairwise = 0.0;  // max over seed pairs of ||sigma_a-sigma_b||_inf
  // discrete energy identity for the two most distant solutions:
  // <-lap_h zeta, zeta>_dmu = <2K(e^sigma_a - e^sigma_b), zeta>_dmu
  double energy_lhs = 0.0;
  double energy_rhs = 0.0;
  double energy_residual = 0.0;
};

// solves from every seed (throws if any fails to converge) and compares
UniquenessReport uniqueness_check(const CurvatureProblem& p,
                                  const std::vector<ScalarField>& seeds,
                                  const SolverConfig& cfg);

struct SeamReport {
  double sigma_jump = 0.0;    // max |sigma| on the inner ring (0 by the
                              // Dirichlet constraint)
  double dn_mismatch = 0.0;   // max one-sided |d_nu sigma| at r_in from the
                              // M side (the extension side derivative is 0)
};

struct ExtendedSolution {
  GridPtr grid;            // enlarged annulus, same spacing and theta count
  ScalarField sigma_ext;   // sigma on M (copied by node), 0 on the extension
  SeamReport seam_report;
};

// extends sigma by zero across the inner boundary down to roughly
// r_extension; the new inner radius snaps to the original radial spacing so
// the overlap nodes keep their indices.  Annulus domains only.
ExtendedSolution extend_by_zero(const SolveResult& res,
                                const CurvatureProblem& p, double r_extension);

}  // namespace prescurv
