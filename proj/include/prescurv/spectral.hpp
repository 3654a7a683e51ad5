#pragma once

// Dirichlet eigenpairs of -lap_h by deflated inverse power iteration
// (matrix-free, every inverse application a cg_solve) and the Green operator
// G = (-lap_h)^{-1} with zero boundary data, plus the norm-bound check
// ||G tau||_dmu <= max(1, 1/lambda1) ||tau||_dmu and the Dirichlet-energy
// identity int |grad G tau|^2 dA = <G tau, -lap_h G tau>_dmu.

#include <cstdint>

#include "prescurv/metric.hpp"
#include "prescurv/solver.hpp"

namespace prescurv {

struct EigenPair {
  double lambda = 0.0;
  ScalarField phi;  // zero on the boundary, unit dmu norm
};

struct Spectrum {
  std::vector<EigenPair> pairs;  // ascending lambda
};

struct EigenOptions {
  double residual_tol = 1e-8;  // accept at ||lap_h phi + lambda phi|| <= tol*lambda
  int max_outer = 500;
  double cg_tol = 1e-10;
  int cg_max_iter = 200000;
  std::uint64_t seed = 1;  // start vectors (deterministic spectra)
};

// k smallest Dirichlet eigenpairs of -lap_h; the inverse iteration runs at
// shift zero so every linear solve stays positive definite for CG
Spectrum dirichlet_eigenpairs(const ConformalMetric& m, int k,
                              const EigenOptions& opt = {});

// x = G tau: -lap_h x = tau on interior nodes, x = 0 on the boundary;
// boundary entries of tau are ignored
ScalarField green_apply(const ConformalMetric& m, const ScalarField& tau,
                        double cg_tol = 1e-12);

struct GreenBoundReport {
  double lambda1 = 0.0;
  double bound = 0.0;      // max(1, 1/lambda1)
  double max_ratio = 0.0;  // max ||G tau|| / ||tau|| over the trials
  bool norm_ok = false;
  double max_energy_residual = 0.0;  // relative identity residual
  bool energy_ok = false;
  double max_cs_slack = 0.0;  // (energy - ||Gtau|| ||lap_h Gtau||) / product
  bool cs_ok = false;
  int trials = 0;
  ScalarField worst_tau;  // the trial achieving max_ratio
  bool ok() const { return norm_ok && energy_ok && cs_ok; }
};

// random unit-dmu-norm interior trials; violations are flagged in the report
// (worst_tau kept for persistence), never thrown
GreenBoundReport green_bound_check(const ConformalMetric& m, int trials,
                                   const EigenOptions& opt = {});

}  // namespace prescurv
