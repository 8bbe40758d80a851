#include "motsim/oracle.hpp"

#include <cmath>

#include "motsim/operators.hpp"

namespace motsim {

namespace {

struct Rhs {
  double du, dv, dw;
};

Rhs ode_rhs(const ModelParams& p, double u, double v, double w) {
  const double fw = response_value(p.response, std::max(w, 0.0));
  const double consume = u * fw;
  return {p.beta * consume, u - v, -consume};
}

}  // namespace

std::vector<OdeState> ode_integrate(const OdeState& s0, const ModelParams& p,
                                    double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ode_integrate: dt must be positive");
  if (t_end < s0.t) throw std::invalid_argument("ode_integrate: t_end before start");

  std::vector<OdeState> traj;
  traj.push_back(s0);
  OdeState s = s0;
  while (s.t < t_end) {
    const double h = std::min(dt, t_end - s.t);
    const Rhs k1 = ode_rhs(p, s.u, s.v, s.w);
    const Rhs k2 = ode_rhs(p, s.u + 0.5 * h * k1.du, s.v + 0.5 * h * k1.dv,
                           s.w + 0.5 * h * k1.dw);
    const Rhs k3 = ode_rhs(p, s.u + 0.5 * h * k2.du, s.v + 0.5 * h * k2.dv,
                           s.w + 0.5 * h * k2.dw);
    const Rhs k4 = ode_rhs(p, s.u + h * k3.du, s.v + h * k3.dv, s.w + h * k3.dw);
    s.u += (h / 6.0) * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    s.v += (h / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    s.w += (h / 6.0) * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
    s.t = (h == dt) ? s.t + h : t_end;
    if (s.u < -1e-12 || s.v < -1e-12 || s.w < -1e-12)
      throw SimError("ode_integrate: state left the nonnegative orthant at t=" +
                     std::to_string(s.t));
    traj.push_back(s);
  }
  return traj;
}

ScalarField heat_mode_decay(const GridSpec& grid, double d_coef, double amplitude,
                            double t_end) {
  const double lambda_h = laplacian_mode_eigenvalue(grid.hx(), grid.lx);
  const double factor = amplitude * std::exp((d_coef * lambda_h - 1.0) * t_end);
  ScalarField v(grid);
  for (int i = 0; i < grid.nx; ++i) {
    const double mode = std::cos(M_PI * grid.x_center(i) / grid.lx);
    for (int j = 0; j < grid.ny; ++j) v(i, j) = 1.0 + factor * mode;
  }
  return v;
}

}  // namespace motsim
