#pragma once

#include <vector>

#include "motsim/model.hpp"

namespace motsim {

/// Spatially homogeneous reduction of the field system:
///   u' = beta u f(w),  v' = u - v,  w' = -u f(w).
/// u + beta w is conserved exactly along the flow; D drops out.
struct OdeState {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double t = 0.0;
};

/// Classical fixed-step RK4 trajectory from s0 to t_end (final step shortened
/// to land exactly). The returned trajectory includes s0 and every accepted
/// step. Throws SimError if any component drops below -1e-12.
std::vector<OdeState> ode_integrate(const OdeState& s0, const ModelParams& p,
                                    double t_end, double dt);

/// Exact semi-discrete solution of v_t = D lap v + 1 - v for
/// v0 = 1 + amplitude * cos(pi x / lx) with source u == 1:
///   v(t) = 1 + amplitude * exp((D lambda_h - 1) t) * mode
/// where lambda_h is the discrete eigenvalue of the x-direction stencil.
/// Validates the implicit v-solve in isolation.
ScalarField heat_mode_decay(const GridSpec& grid, double d_coef, double amplitude,
                            double t_end);

}  // namespace motsim
