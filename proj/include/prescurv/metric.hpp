#pragma once

// Conformal metrics h|dz|^2 given by a positive nodal factor h, their Gauss
// curvature K0 = -lap(log h)/(2h), and C^2 cutoff machinery for blending
// several factors into one metric.  An orthogonal-coordinates variant
// E dr^2 + G dtheta^2 is provided with both signs of the curvature formula:
// the flux-divergence bracket is commonly printed with a leading minus, but
// some sources omit it, and for sign-sensitive factors the two disagree.

#include "prescurv/grid.hpp"

namespace prescurv {

struct ConformalMetric {
  GridPtr g;
  ScalarField h;        // conformal factor, positive everywhere
  ScalarField K0;       // curvature of h, cached at construction
  ScalarField weights;  // nodal area density of dmu: h*r (annulus) or h (rectangle)
};

// curvature of the factor alone; boundary rows use one-sided stencils
ScalarField curvature_conformal(const ScalarField& h);

ConformalMetric from_factor(ScalarField h);
ConformalMetric flat_metric(const GridPtr& g);
// h = (r log(1/r))^-2, constant curvature -1; requires annulus with r_out < 1
ConformalMetric cusp_metric(const GridPtr& g);
// h = 4/(1-r^2)^2, constant curvature -1; requires annulus with r_out < 1
ConformalMetric poincare_metric(const GridPtr& g);
// h = log(4/r); requires annulus with r_out < 4.  Curvature is positive:
// K0 = 1/(2 r^2 log(4/r)^3).
ConformalMetric log4_metric(const GridPtr& g);

// factor field without metric validation (building block for blends)
ScalarField log4_factor(const GridPtr& g);
ScalarField cusp_factor(const GridPtr& g);
ScalarField poincare_factor(const GridPtr& g);

struct OrthogonalMetric {
  GridPtr g;  // annulus
  ScalarField E, G;  // ds^2 = E dr^2 + G dtheta^2
};

enum class OrthSign { leading_minus, no_leading_minus };

// K = -(1/(2 sqrt(EG))) [ (E_theta/sqrt(EG))_theta + (G_r/sqrt(EG))_r ]
// with OrthSign::no_leading_minus dropping the overall minus
ScalarField curvature_orthogonal(const OrthogonalMetric& m, OrthSign sign);

// quintic smoothstep profile between plateaus at a and b; C^2 everywhere
struct Cutoff {
  double a = 0.0, b = 1.0;
  bool decreasing = true;  // 1 before a, 0 after b; increasing mirrors this
};

double cutoff_eval(const Cutoff& c, double r);

struct BlendPiece {
  ScalarField factor;
  Cutoff rho;
};

// h = sum rho_i * f_i + rho_bg * h_bg nodewise; errors if the blend is not
// positive everywhere.  Annulus grids only (cutoffs are radial profiles).
ConformalMetric blend_metrics(const std::vector<BlendPiece>& pieces,
                              const BlendPiece& background);

}  // namespace prescurv
