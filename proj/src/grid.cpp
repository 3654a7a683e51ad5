#include "prescurv/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace prescurv {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void fill_common(Grid& g) {
  g.c1.resize(g.n1);
  g.c2.resize(g.n2);
  g.bdry.assign(g.n1 * g.n2, 0);
  g.q1.assign(g.n1, g.d1);
  g.q1.front() = 0.5 * g.d1;
  g.q1.back() = 0.5 * g.d1;
  if (g.kind == GridKind::annulus) {
    g.q2.assign(g.n2, g.d2);  // periodic: plain rectangle rule
  } else {
    g.q2.assign(g.n2, g.d2);
    g.q2.front() = 0.5 * g.d2;
    g.q2.back() = 0.5 * g.d2;
  }
}

}  // namespace

double Grid::boundary_distance(int node) const {
  int i = node / n2, j = node % n2;
  if (kind == GridKind::annulus) {
    double r = c1[i];
    return std::min(r - r_in, r_out - r);
  }
  double x = c1[i], y = c2[j];
  return std::min(std::min(x, lx - x), std::min(y, ly - y));
}

bool Grid::same_layout(const Grid& o) const {
  if (kind != o.kind || n1 != o.n1 || n2 != o.n2) return false;
  if (kind == GridKind::annulus)
    return r_in == o.r_in && r_out == o.r_out;
  return lx == o.lx && ly == o.ly;
}

GridPtr build_annulus(double r_in, double r_out, int n_r, int n_theta) {
  if (!(r_in > 0.0)) throw std::invalid_argument("build_annulus: r_in must be positive");
  if (!(r_out > r_in)) throw std::invalid_argument("build_annulus: r_out must exceed r_in");
  if (n_r < 9) throw std::invalid_argument("build_annulus: n_r below minimum (9)");
  if (n_theta < 8) throw std::invalid_argument("build_annulus: n_theta below minimum (8)");
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::annulus;
  g->r_in = r_in;
  g->r_out = r_out;
  g->n1 = n_r;
  g->n2 = n_theta;
  g->d1 = (r_out - r_in) / (n_r - 1);
  g->d2 = two_pi / n_theta;
  fill_common(*g);
  for (int i = 0; i < n_r; ++i) g->c1[i] = r_in + i * g->d1;
  g->c1.back() = r_out;
  for (int j = 0; j < n_theta; ++j) g->c2[j] = j * g->d2;
  for (int j = 0; j < n_theta; ++j) {
    g->bdry[g->index(0, j)] = 1;
    g->bdry[g->index(n_r - 1, j)] = 1;
  }
  g->inv_c1.resize(n_r);
  g->inv_c1_sq.resize(n_r);
  for (int i = 0; i < n_r; ++i) {
    g->inv_c1[i] = 1.0 / g->c1[i];
    g->inv_c1_sq[i] = g->inv_c1[i] * g->inv_c1[i];
  }
  return g;
}

GridPtr build_rectangle(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("build_rectangle: side lengths must be positive");
  if (nx < 9) throw std::invalid_argument("build_rectangle: nx below minimum (9)");
  if (ny < 9) throw std::invalid_argument("build_rectangle: ny below minimum (9)");
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::rectangle;
  g->lx = lx;
  g->ly = ly;
  g->n1 = nx;
  g->n2 = ny;
  g->d1 = lx / (nx - 1);
  g->d2 = ly / (ny - 1);
  fill_common(*g);
  for (int i = 0; i < nx; ++i) g->c1[i] = i * g->d1;
  g->c1.back() = lx;
  for (int j = 0; j < ny; ++j) g->c2[j] = j * g->d2;
  g->c2.back() = ly;
  for (int j = 0; j < ny; ++j) {
    g->bdry[g->index(0, j)] = 1;
    g->bdry[g->index(nx - 1, j)] = 1;
  }
  for (int i = 0; i < nx; ++i) {
    g->bdry[g->index(i, 0)] = 1;
    g->bdry[g->index(i, ny - 1)] = 1;
  }
  return g;
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* op) {
  if (!a.g || !b.g || !a.g->same_layout(*b.g))
    throw std::invalid_argument(std::string(op) + ": fields on mismatched grids");
}

void require_finite(const ScalarField& f, const char* op) {
  for (int n = 0; n < f.size(); ++n)
    if (!std::isfinite(f.v[n]))
      throw std::runtime_error(std::string(op) + ": non-finite value at node " +
                               std::to_string(n / f.g->n2) + "," +
                               std::to_string(n % f.g->n2));
}

void flat_laplacian_into(const Grid& g, const double* f, double* out) {
  const int n1 = g.n1, n2 = g.n2;
  const double inv_d1sq = 1.0 / (g.d1 * g.d1);
  const double inv_2d1 = 1.0 / (2.0 * g.d1);
  const double inv_d2sq = 1.0 / (g.d2 * g.d2);

  if (g.kind == GridKind::annulus) {
    for (int i = 0; i < n1; ++i) {
      const double* fi = f + i * n2;
      double* oi = out + i * n2;
      const double ir = g.inv_c1[i], ir2 = g.inv_c1_sq[i];
      double frr, fr;
      for (int j = 0; j < n2; ++j) {
        const int jm = (j == 0) ? n2 - 1 : j - 1;
        const int jp = (j == n2 - 1) ? 0 : j + 1;
        if (i == 0) {
          frr = (2.0 * fi[j] - 5.0 * fi[n2 + j] + 4.0 * fi[2 * n2 + j] - fi[3 * n2 + j]) * inv_d1sq;
          fr = (-3.0 * fi[j] + 4.0 * fi[n2 + j] - fi[2 * n2 + j]) * inv_2d1;
        } else if (i == n1 - 1) {
          frr = (2.0 * fi[j] - 5.0 * fi[j - n2] + 4.0 * fi[j - 2 * n2] - fi[j - 3 * n2]) * inv_d1sq;
          fr = (3.0 * fi[j] - 4.0 * fi[j - n2] + fi[j - 2 * n2]) * inv_2d1;
        } else {
          frr = (fi[j + n2] - 2.0 * fi[j] + fi[j - n2]) * inv_d1sq;
          fr = (fi[j + n2] - fi[j - n2]) * inv_2d1;
        }
        const double ftt = (fi[jp] - 2.0 * fi[j] + fi[jm]) * inv_d2sq;
        oi[j] = frr + fr * ir + ftt * ir2;
      }
    }
    return;
  }

  for (int i = 0; i < n1; ++i) {
    const double* fi = f + i * n2;
    double* oi = out + i * n2;
    for (int j = 0; j < n2; ++j) {
      double fxx, fyy;
      if (i == 0)
        fxx = (2.0 * fi[j] - 5.0 * fi[n2 + j] + 4.0 * fi[2 * n2 + j] - fi[3 * n2 + j]) * inv_d1sq;
      else if (i == n1 - 1)
        fxx = (2.0 * fi[j] - 5.0 * fi[j - n2] + 4.0 * fi[j - 2 * n2] - fi[j - 3 * n2]) * inv_d1sq;
      else
        fxx = (fi[j + n2] - 2.0 * fi[j] + fi[j - n2]) * inv_d1sq;
      if (j == 0)
        fyy = (2.0 * fi[0] - 5.0 * fi[1] + 4.0 * fi[2] - fi[3]) * inv_d2sq;
      else if (j == n2 - 1)
        fyy = (2.0 * fi[j] - 5.0 * fi[j - 1] + 4.0 * fi[j - 2] - fi[j - 3]) * inv_d2sq;
      else
        fyy = (fi[j + 1] - 2.0 * fi[j] + fi[j - 1]) * inv_d2sq;
      oi[j] = fxx + fyy;
    }
  }
}

ScalarField flat_laplacian(const ScalarField& f) {
  require_finite(f, "flat_laplacian");
  ScalarField out(f.g);
  flat_laplacian_into(*f.g, f.v.data(), out.v.data());
  require_finite(out, "flat_laplacian");
  return out;
}

double weighted_dot(int n, const double* a, const double* b, const double* w) {
  double sum = 0.0, comp = 0.0;
  for (int k = 0; k < n; ++k) {
    double term = a[k] * b[k] * w[k] - comp;
    double t = sum + term;
    comp = (t - sum) - term;
    sum = t;
  }
  return sum;
}

double integrate(const ScalarField& f, const ScalarField& w) {
  require_same_grid(f, w, "integrate");
  const Grid& g = *f.g;
  double sum = 0.0, comp = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      double term = f.v[g.index(i, j)] * w.v[g.index(i, j)] * g.q1[i] * g.q2[j] - comp;
      double t = sum + term;
      comp = (t - sum) - term;
      sum = t;
    }
  if (!std::isfinite(sum)) throw std::runtime_error("integrate: non-finite result");
  return sum;
}

double inner_product(const ScalarField& f, const ScalarField& h, const ScalarField& w) {
  require_same_grid(f, h, "inner_product");
  require_same_grid(f, w, "inner_product");
  const Grid& g = *f.g;
  double sum = 0.0, comp = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      int n = g.index(i, j);
      double term = f.v[n] * h.v[n] * w.v[n] * g.q1[i] * g.q2[j] - comp;
      double t = sum + term;
      comp = (t - sum) - term;
      sum = t;
    }
  if (!std::isfinite(sum)) throw std::runtime_error("inner_product: non-finite result");
  return sum;
}

double interior_integral(const ScalarField& f, const ScalarField& w) {
  require_same_grid(f, w, "interior_integral");
  const Grid& g = *f.g;
  double sum = 0.0, comp = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      int n = g.index(i, j);
      if (g.bdry[n]) continue;
      double term = f.v[n] * w.v[n] * g.q1[i] * g.q2[j] - comp;
      double t = sum + term;
      comp = (t - sum) - term;
      sum = t;
    }
  return sum;
}

ScalarField flat_weights(const GridPtr& g) {
  ScalarField w(g);
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j)
      w(i, j) = (g->kind == GridKind::annulus) ? g->c1[i] : 1.0;
  return w;
}

namespace {

// one-sided second-order first derivative along coord1, pointing outward
double outward_d1(const Grid& g, const double* f, int i, int j, bool at_low) {
  const int n2 = g.n2;
  const double inv_2d1 = 1.0 / (2.0 * g.d1);
  const double* fj = f + j;
  if (at_low)  // outward is -coord1
    return (3.0 * fj[i * n2] - 4.0 * fj[(i + 1) * n2] + fj[(i + 2) * n2]) * inv_2d1;
  return (3.0 * fj[i * n2] - 4.0 * fj[(i - 1) * n2] + fj[(i - 2) * n2]) * inv_2d1;
}

double outward_d2(const Grid& g, const double* f, int i, int j, bool at_low) {
  const double inv_2d2 = 1.0 / (2.0 * g.d2);
  const double* fi = f + i * g.n2;
  if (at_low)
    return (3.0 * fi[j] - 4.0 * fi[j + 1] + fi[j + 2]) * inv_2d2;
  return (3.0 * fi[j] - 4.0 * fi[j - 1] + fi[j - 2]) * inv_2d2;
}

}  // namespace

BoundaryTrace normal_derivative(const ScalarField& f) {
  require_finite(f, "normal_derivative");
  const Grid& g = *f.g;
  const double* fv = f.v.data();
  BoundaryTrace tr;
  if (g.kind == GridKind::annulus) {
    BoundaryTrace::Component inner{"inner", {}, {}}, outer{"outer", {}, {}};
    for (int j = 0; j < g.n2; ++j) {
      inner.nodes.push_back(g.index(0, j));
      inner.values.push_back(outward_d1(g, fv, 0, j, true));
      outer.nodes.push_back(g.index(g.n1 - 1, j));
      outer.values.push_back(outward_d1(g, fv, g.n1 - 1, j, false));
    }
    tr.components = {std::move(inner), std::move(outer)};
    return tr;
  }
  // rectangle: bottom/top take the corner nodes, left/right exclude them so
  // that every boundary node is covered exactly once
  BoundaryTrace::Component bottom{"bottom", {}, {}}, top{"top", {}, {}},
      left{"left", {}, {}}, right{"right", {}, {}};
  for (int i = 0; i < g.n1; ++i) {
    bottom.nodes.push_back(g.index(i, 0));
    bottom.values.push_back(outward_d2(g, fv, i, 0, true));
    top.nodes.push_back(g.index(i, g.n2 - 1));
    top.values.push_back(outward_d2(g, fv, i, g.n2 - 1, false));
  }
  for (int j = 1; j < g.n2 - 1; ++j) {
    left.nodes.push_back(g.index(0, j));
    left.values.push_back(outward_d1(g, fv, 0, j, true));
    right.nodes.push_back(g.index(g.n1 - 1, j));
    right.values.push_back(outward_d1(g, fv, g.n1 - 1, j, false));
  }
  tr.components = {std::move(bottom), std::move(top), std::move(left), std::move(right)};
  return tr;
}

double boundary_flux_integral(const ScalarField& f) {
  require_finite(f, "boundary_flux_integral");
  const Grid& g = *f.g;
  const double* fv = f.v.data();
  double sum = 0.0;
  if (g.kind == GridKind::annulus) {
    for (int j = 0; j < g.n2; ++j) {
      sum += outward_d1(g, fv, 0, j, true) * g.r_in * g.d2;
      sum += outward_d1(g, fv, g.n1 - 1, j, false) * g.r_out * g.d2;
    }
    return sum;
  }
  // four edges, trapezoid along each, corners counted on both adjacent edges
  for (int i = 0; i < g.n1; ++i) {
    double w = g.q1[i];
    sum += outward_d2(g, fv, i, 0, true) * w;
    sum += outward_d2(g, fv, i, g.n2 - 1, false) * w;
  }
  for (int j = 0; j < g.n2; ++j) {
    double w = g.q2[j];
    sum += outward_d1(g, fv, 0, j, true) * w;
    sum += outward_d1(g, fv, g.n1 - 1, j, false) * w;
  }
  return sum;
}

double dirichlet_energy(const ScalarField& f) {
  require_finite(f, "dirichlet_energy");
  const Grid& g = *f.g;
  const double* fv = f.v.data();
  const int n1 = g.n1, n2 = g.n2;
  double sum = 0.0, comp = 0.0;
  auto add = [&](double term) {
    term -= comp;
    double t = sum + term;
    comp = (t - sum) - term;
    sum = t;
  };
  if (g.kind == GridKind::annulus) {
    const double inv_d1 = 1.0 / g.d1;
    for (int i = 0; i + 1 < n1; ++i) {
      const double rmid = 0.5 * (g.c1[i] + g.c1[i + 1]);
      for (int j = 0; j < n2; ++j) {
        double df = (fv[(i + 1) * n2 + j] - fv[i * n2 + j]) * inv_d1;
        add(df * df * rmid * g.d1 * g.d2);
      }
    }
    const double inv_d2 = 1.0 / g.d2;
    for (int i = 0; i < n1; ++i) {
      const double ir = g.inv_c1[i];
      for (int j = 0; j < n2; ++j) {
        int jp = (j == n2 - 1) ? 0 : j + 1;
        double df = (fv[i * n2 + jp] - fv[i * n2 + j]) * inv_d2;
        add(df * df * ir * g.d1 * g.d2);
      }
    }
    return sum;
  }
  const double inv_d1 = 1.0 / g.d1, inv_d2 = 1.0 / g.d2;
  for (int i = 0; i + 1 < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double df = (fv[(i + 1) * n2 + j] - fv[i * n2 + j]) * inv_d1;
      add(df * df * g.d1 * g.d2);
    }
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j + 1 < n2; ++j) {
      double df = (fv[i * n2 + j + 1] - fv[i * n2 + j]) * inv_d2;
      add(df * df * g.d1 * g.d2);
    }
  return sum;
}

}  // namespace prescurv
