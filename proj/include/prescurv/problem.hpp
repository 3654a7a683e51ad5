#pragma once

// The variational core: curvature transformation law for e^sigma h, the
// residual b = K0 - (1/2) lap_h sigma - K e^sigma, the functional
// S = int b^2 dmu, its gradient, and construction of admissible targets that
// agree with K0 on a collar around the boundary.  All integrals use the dmu
// quadrature over interior nodes; boundary values of b and of the gradient
// are fixed to 0 (the distributional convention lap_h sigma = 0 on the
// boundary, consistent with b = K0 - K = 0 there under the collar invariant).

#include "prescurv/metric.hpp"

namespace prescurv {

struct CurvatureProblem {
  ConformalMetric metric;
  ScalarField K;        // target curvature, negative at every node
  double collar_width;  // coordinate distance from the boundary on which K = K0
};

enum class TargetKind { scale, offset, field };

struct TargetSpec {
  TargetKind kind = TargetKind::scale;
  double value = 1.0;   // scale factor c > 0 or offset d
  ScalarField field;    // explicit inner curvature for TargetKind::field
};

// C^2 profile: 0 within collar of every boundary component, quintic ramp on
// [collar, 2*collar] of boundary distance, 1 beyond
ScalarField blend_cutoff(const GridPtr& g, double collar_width);

// K = K0 + chi * (K_inner - K0) with K_inner = c*K0, K0 + d, or a user field;
// errors if the result is not negative everywhere
ScalarField blend_target(const ConformalMetric& base, const TargetSpec& spec,
                         double collar_width);

// validates negativity of K, the collar agreement K = K0, and K0 < 0 on the
// boundary
CurvatureProblem make_problem(ConformalMetric metric, ScalarField K,
                              double collar_width);

// lap_h f = flat_laplacian(f)/h nodewise
ScalarField laplace_beltrami(const ScalarField& f, const ConformalMetric& m);

// curvature of e^sigma h: K(sigma) = e^-sigma (K0 - (1/2) lap_h sigma)
ScalarField curvature_of(const ScalarField& sigma, const ConformalMetric& m);

struct Residual {
  ScalarField b;   // zero at boundary nodes
  double S = 0.0;  // int b^2 dmu over interior
  double b_l2 = 0.0;
};

// requires |sigma| <= 1e-12 on the boundary
Residual residual_b(const ScalarField& sigma, const CurvatureProblem& p);

// int (K(sigma) - K)^2 e^{2 sigma} dmu over interior, evaluated literally in
// that form (agrees with residual_b(...).S up to rounding)
double functional_S(const ScalarField& sigma, const CurvatureProblem& p);

// gradient of S in the dmu inner product: -lap_h b - 2 K e^sigma b on the
// interior, 0 on the boundary
ScalarField gradient_S(const ScalarField& sigma, const CurvatureProblem& p);

// dmu area of the domain (full trapezoid quadrature, boundary rows included)
double domain_area(const ConformalMetric& m);

}  // namespace prescurv
