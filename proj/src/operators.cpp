#include "motsim/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace motsim {

namespace {

void require_same_shape(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": field shapes do not match");
}

// Throws on the first nonpositive v entry, naming the cell.
void require_positive(const ScalarField& v, const char* what) {
  const auto& g = v.grid();
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      if (!(v(i, j) > 0.0))
        throw PositivityError(std::string(what) + ": v must be positive, got " +
                                  std::to_string(v(i, j)) + " at cell (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")",
                              i, j);
}

}  // namespace

ScalarField laplacian_neumann(const ScalarField& phi) {
  const GridSpec& g = phi.grid();
  ScalarField out(g);
  const int nx = g.nx;
  const int ny = g.ny;
  const double ax = 1.0 / (g.hx() * g.hx());
  const double ay = 1.0 / (g.hy() * g.hy());
  const double* p = phi.data().data();
  double* o = out.data().data();
  // Sum of inward face fluxes; mirror ghosts make boundary fluxes zero. The
  // boundary rows take the branchy path, interior rows a branch-free one;
  // both evaluate the identical flux expression.
  auto edge_cell = [&](int i, int j) {
    const std::size_t c = static_cast<std::size_t>(i) * ny + j;
    const double pc = p[c];
    double fx = 0.0;
    if (i > 0) fx += p[c - ny] - pc;
    if (i + 1 < nx) fx += p[c + ny] - pc;
    double fy = 0.0;
    if (j > 0) fy += p[c - 1] - pc;
    if (j + 1 < ny) fy += p[c + 1] - pc;
    o[c] = fx * ax + fy * ay;
  };
  for (int j = 0; j < ny; ++j) edge_cell(0, j);
  for (int i = 1; i + 1 < nx; ++i) {
    edge_cell(i, 0);
    const std::size_t row = static_cast<std::size_t>(i) * ny;
    for (int j = 1; j + 1 < ny; ++j) {
      const std::size_t c = row + j;
      const double pc = p[c];
      const double fx = (p[c - ny] - pc) + (p[c + ny] - pc);
      const double fy = (p[c - 1] - pc) + (p[c + 1] - pc);
      o[c] = fx * ax + fy * ay;
    }
    edge_cell(i, ny - 1);
  }
  if (nx > 1)
    for (int j = 0; j < ny; ++j) edge_cell(nx - 1, j);
  return out;
}

double laplacian_mode_eigenvalue(double h, double l, int k) {
  return -(2.0 / (h * h)) * (1.0 - std::cos(k * M_PI * h / l));
}

ScalarField motility_flux_divergence(const ScalarField& u, const ScalarField& v,
                                     const ModelParams& p) {
  require_same_shape(u, v, "motility_flux_divergence");
  require_positive(v, "motility_flux_divergence");
  const GridSpec& g = u.grid();
  ScalarField phi(g);
  const double* uu = u.data().data();
  const double* vv = v.data().data();
  double* ph = phi.data().data();
  const std::size_t n = phi.size();
  if (p.eps == 0.0 && p.m == 2.0 && p.alpha == 1.0) {
    for (std::size_t c = 0; c < n; ++c) ph[c] = uu[c] * uu[c] / vv[c];
  } else if (p.eps == 0.0) {
    for (std::size_t c = 0; c < n; ++c)
      ph[c] = pow_real(uu[c], p.m) * pow_real(vv[c], -p.alpha);
  } else {
    for (std::size_t c = 0; c < n; ++c)
      ph[c] = uu[c] * pow_real(uu[c] + p.eps, p.m - 1.0) * pow_real(vv[c], -p.alpha);
  }
  return laplacian_neumann(phi);
}

ScalarField regularization_divergence(const ScalarField& u, const ModelParams& p) {
  if (!(p.eps > 0.0))
    throw std::invalid_argument("regularization_divergence requires eps > 0");
  const GridSpec& g = u.grid();
  ScalarField phi(g);
  const double* uu = u.data().data();
  double* ph = phi.data().data();
  for (std::size_t c = 0; c < phi.size(); ++c) ph[c] = pow_real(uu[c] + 1.0, p.cap_m);
  ScalarField out = laplacian_neumann(phi);
  for (double& x : out.data()) x *= p.eps;
  return out;
}

double grad_sq_integral(const ScalarField& phi) {
  const GridSpec& g = phi.grid();
  const int nx = g.nx;
  const int ny = g.ny;
  const double wx = g.cell_area() / (g.hx() * g.hx());
  const double wy = g.cell_area() / (g.hy() * g.hy());
  const double* p = phi.data().data();
  // x faces, then y faces; pairwise order fixed by the flattened face index.
  const std::size_t n_xf = static_cast<std::size_t>(nx - 1) * ny;
  const double sx = pairwise_sum_n(0, n_xf, [&](std::size_t f) {
    const std::size_t i = f / ny;
    const std::size_t j = f % ny;
    const std::size_t c = i * ny + j;
    const double d = p[c + ny] - p[c];
    return d * d;
  });
  const std::size_t n_yf = static_cast<std::size_t>(nx) * (ny - 1);
  const double sy = pairwise_sum_n(0, n_yf, [&](std::size_t f) {
    const std::size_t i = f / (ny - 1);
    const std::size_t j = f % (ny - 1);
    const std::size_t c = i * ny + j;
    const double d = p[c + 1] - p[c];
    return d * d;
  });
  return sx * wx + sy * wy;
}

double weighted_power_integral(const ScalarField& u, const ScalarField& v, double p_exp,
                               double a_exp) {
  require_same_shape(u, v, "weighted_power_integral");
  require_positive(v, "weighted_power_integral");
  const double* uu = u.data().data();
  const double* vv = v.data().data();
  const double s = pairwise_sum_n(0, u.size(), [&](std::size_t c) {
    return pow_real(uu[c], p_exp) * pow_real(vv[c], -a_exp);
  });
  return s * u.grid().cell_area();
}

}  // namespace motsim
