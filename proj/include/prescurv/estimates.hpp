#pragma once

// A-priori estimate machinery on interior nodes: the g = (dK/dzbar)/|K|
// field, the three-way partition by |d_z sigma| vs |g| and |K|e^sigma vs
// |g|^2, the B-term report with the D^2 bound and the Laplacian-energy
// bound, and a monitor for solver histories (S monotone, Cauchy tail of
// ||lap_h sigma||, final S against tol^2).

#include <cstdint>

#include "prescurv/problem.hpp"
#include "prescurv/solver.hpp"

namespace prescurv {

struct ComplexField {
  GridPtr g;
  std::vector<double> re, im;  // zero on boundary nodes
};

// g = (K_x + i K_y)/(2|K|) on interior nodes by centered differences (polar
// grids via the chain rule); requires K < 0 at every node
ComplexField g_field(const ScalarField& K);

struct OmegaPartition {
  GridPtr g;
  std::vector<std::uint8_t> label;  // 1, 2, 3 on interior nodes; 0 on boundary
  int count1 = 0, count2 = 0, count3 = 0;
};

// label 1 iff |d_z sigma| > |g|; label 2 iff |d_z sigma| <= |g| and
// |K| e^sigma > |g|^2; label 3 otherwise
OmegaPartition omega_partition(const ScalarField& sigma, const ScalarField& K);

struct EstimateReport {
  // B_i = int_{Omega_i} (K^2 e^{2 sigma} + lap_h sigma e^sigma K) dmu
  double B1 = 0.0, B2 = 0.0, B3 = 0.0;
  double D2 = 0.0;  // (max interior |g|)^4 * mu(M)
  double mu = 0.0;
  double eps_q = 0.0;  // quadrature slack 1e-10 * mu
  double max_abs_g = 0.0;
  int omega1 = 0, omega2 = 0, omega3 = 0;
  bool b1_ok = false;     // B1 >= -eps_q
  bool b2_ok = false;     // B2 >= -eps_q
  bool bound_ok = false;  // |B3| <= 3 D2 (+ eps_q)
  double identity_residual = 0.0;  // |B1+B2+B3 - single-pass interior integral|
  double laplacian_energy = 0.0;   // int (lap_h sigma)^2 dmu
  double C_proxy = 0.0;            // sqrt(S) + sqrt(int K0^2 dmu)
  bool energy_ok = false;  // laplacian_energy <= 4 (C_proxy^2 + 3 D2) + eps_q
  double boundary_term = 0.0;  // contour int d_nu sigma K e^sigma dl (flat)
  // integration by parts of the cross term, all on the flat measure:
  // int lap_h sigma e^s K dmu = int |grad s|^2 e^s |K| dA
  //                             - 4 Re int (d_z s) g |K| e^s dA + boundary_term
  double by_parts_lhs = 0.0, by_parts_rhs = 0.0, by_parts_residual = 0.0;
  bool ok() const { return b1_ok && b2_ok && bound_ok && energy_ok; }
};

EstimateReport b_terms_report(const ScalarField& sigma,
                              const CurvatureProblem& p);

struct ConvergenceReport {
  bool degenerate = false;  // fewer than 2 records
  bool s_nonincreasing = false;
  double lap_tail_mean = 0.0;
  double lap_tail_oscillation = 0.0;  // max - min over the last quarter
  bool lap_tail_ok = false;           // oscillation <= 1% of mean
  double S_final = 0.0;
  bool final_s_ok = false;  // S_final <= tol_b^2
  bool ok() const { return s_nonincreasing && lap_tail_ok && final_s_ok; }
};

ConvergenceReport convergence_monitor(
    const std::vector<IterationRecord>& history, double tol_b);

}  // namespace prescurv
