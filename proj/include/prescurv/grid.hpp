#pragma once

// Structured node-centered grids on annuli (polar, periodic in theta) and
// rectangles, plus the finite-difference and quadrature kernels everything
// else is built on.  Node (i,j) has coordinates (c1[i], c2[j]); index = i*n2+j.
// Interior stencils are second-order centered; nodes on the domain boundary
// get one-sided second-order stencils and are flagged by the boundary mask,
// so consumers can treat those values as diagnostics rather than solves.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace prescurv {

enum class GridKind { annulus, rectangle };

struct Grid {
  GridKind kind = GridKind::rectangle;
  // annulus parameters
  double r_in = 0.0, r_out = 0.0;
  // rectangle parameters (x in [0,lx], y in [0,ly])
  double lx = 0.0, ly = 0.0;

  int n1 = 0, n2 = 0;      // node counts along r/x and theta/y
  double d1 = 0.0, d2 = 0.0;
  std::vector<double> c1, c2;          // node coordinates
  std::vector<std::uint8_t> bdry;      // 1 on boundary nodes
  // coordinate quadrature coefficients: sum f(i,j)*q1[i]*q2[j] integrates
  // f dr dtheta (annulus) or f dx dy (rectangle); trapezoid along r/x/y,
  // rectangle rule along the periodic theta direction
  std::vector<double> q1, q2;
  std::vector<double> inv_c1, inv_c1_sq;  // cached 1/r, 1/r^2 (annulus)

  int size() const { return n1 * n2; }
  int index(int i, int j) const { return i * n2 + j; }
  bool periodic2() const { return kind == GridKind::annulus; }
  bool is_boundary(int node) const { return bdry[node] != 0; }
  // distance from a node to the domain boundary
  double boundary_distance(int node) const;

  bool same_layout(const Grid& o) const;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_annulus(double r_in, double r_out, int n_r, int n_theta);
GridPtr build_rectangle(double lx, double ly, int nx, int ny);

struct ScalarField {
  GridPtr g;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(GridPtr grid) : g(std::move(grid)), v(g->size(), 0.0) {}
  double& operator()(int i, int j) { return v[g->index(i, j)]; }
  double operator()(int i, int j) const { return v[g->index(i, j)]; }
  int size() const { return static_cast<int>(v.size()); }
};

// one entry per boundary component; every boundary node appears exactly once
struct BoundaryTrace {
  struct Component {
    std::string name;
    std::vector<int> nodes;
    std::vector<double> values;
  };
  std::vector<Component> components;
};

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* op);
void require_finite(const ScalarField& f, const char* op);

// low-level kernel: flat Laplacian of f into out (both size g.size()).
// Annulus: f_rr + f_r/r + f_tt/r^2, periodic in theta, one-sided in r at the
// two rings.  Rectangle: f_xx + f_yy, one-sided on the four edges.
void flat_laplacian_into(const Grid& g, const double* f, double* out);

ScalarField flat_laplacian(const ScalarField& f);

// integral of f against a nodal area density w (relative to dr dtheta / dx dy)
double integrate(const ScalarField& f, const ScalarField& w);
double inner_product(const ScalarField& f, const ScalarField& g,
                     const ScalarField& w);
// same integral restricted to interior nodes
double interior_integral(const ScalarField& f, const ScalarField& w);

// nodal flat-measure density: r on annuli, 1 on rectangles
ScalarField flat_weights(const GridPtr& g);

// outward normal derivative on each boundary component, one-sided second order
BoundaryTrace normal_derivative(const ScalarField& f);

// line integral of the outward normal derivative over the whole boundary,
// with rectangle corners contributing to both adjacent edges
double boundary_flux_integral(const ScalarField& f);

// integral |grad f|^2 dA_flat by staggered face differences.  For fields
// vanishing on the boundary this matches -sum f * flat_laplacian(f) * dA
// exactly (summation by parts), independent of any conformal factor.
double dirichlet_energy(const ScalarField& f);

// deterministic fixed-order weighted dot: sum a[n]*b[n]*w[n] (Kahan)
double weighted_dot(int n, const double* a, const double* b, const double* w);

}  // namespace prescurv
