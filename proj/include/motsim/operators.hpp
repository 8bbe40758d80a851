#pragma once

#include "motsim/model.hpp"

namespace motsim {

/// Conservative 5-point finite-volume Laplacian with homogeneous Neumann
/// boundaries realized by mirror ghost cells (boundary faces carry zero flux).
/// The discrete integral of the result telescopes to zero up to round-off.
ScalarField laplacian_neumann(const ScalarField& phi);

/// Eigenvalue of the 1D Neumann stencil for the cell-centered sampled mode
/// cos(k pi x / l): lambda_h = -(2/h^2)(1 - cos(k pi h / l)). The sampled mode
/// is an exact discrete eigenvector of laplacian_neumann in that direction.
double laplacian_mode_eigenvalue(double h, double l, int k = 1);

/// lap of the pointwise composite phi = u (u+eps)^(m-1) v^-alpha, which
/// reduces to u^m / v^alpha when eps = 0. Conservative by construction;
/// degeneracy at u = 0 needs no special handling because phi vanishes there.
/// Throws PositivityError (with cell index) if any v <= 0.
ScalarField motility_flux_divergence(const ScalarField& u, const ScalarField& v,
                                     const ModelParams& p);

/// eps * lap((u+1)^M). Throws std::invalid_argument when called with eps = 0.
ScalarField regularization_divergence(const ScalarField& u, const ModelParams& p);

/// Discrete Dirichlet form: sum over interior faces of (face difference /
/// spacing)^2 * cell_area. Face weights are chosen so that the identity
/// grad_sq_integral(phi) == sum phi * (-lap phi) * cell_area holds exactly
/// in exact arithmetic; boundary faces contribute zero.
double grad_sq_integral(const ScalarField& phi);

/// sum u^p_exp * v^-a_exp * cell_area. Throws PositivityError if any v <= 0.
double weighted_power_integral(const ScalarField& u, const ScalarField& v,
                               double p_exp, double a_exp);

}  // namespace motsim
