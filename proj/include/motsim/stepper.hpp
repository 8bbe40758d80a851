#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "motsim/model.hpp"

namespace motsim {

/// Time-step controls. Invariants: dt_min <= dt_init <= dt_max, 0 < safety <= 1.
struct StepControl {
  double dt_init = 1e-4;         // cap on the very first step
  double dt_min = 1e-12;         // abort threshold for the stability bound
  double dt_max = 1e-2;          // cap
  double safety = 0.5;           // CFL safety factor in (0, 1]
  double cg_tol = 1e-10;         // relative residual tolerance for CG
  int cg_max_iter = 10000;       // iteration cap
  double negativity_tol = 1e-12; // magnitude below which negative u/w flush to 0
};

std::vector<std::string> validate_control(const StepControl& ctl);

struct StepOutcome {
  FieldState state;
  double dt_used = 0.0;
  int cg_iters_v = 0;
  int cg_iters_w = 0;
  /// Combined-mass units: |flushed u| * area + beta * |flushed w| * area.
  double flushed_mass = 0.0;
};

/// Explicit-stability bound for the quasilinear u-update plus reactions:
///   dt = clamp(safety / (4 kappa_max (1/hx^2 + 1/hy^2) + rho_max), dt_min, dt_max)
/// kappa_max = max over cells of
///   eps M (u+1)^(M-1) + (m u + eps) (u+eps)^(m-2) v^-alpha
/// (the u-derivative of the composite diffusion flux) and
/// rho_max = f(max w) * max(beta, 1) bounds the reaction rates.
/// Throws StiffnessError when the unclamped value falls below dt_min.
double stable_dt(const FieldState& state, const ModelParams& p, const StepControl& ctl);

/// One IMEX step:
///  - u: forward Euler on the conservative fluxes and the growth reaction,
///    all terms at time level n;
///  - w: backward Euler diffusion, (I - dt lap) w' = w - dt u f(w), CG solve;
///  - v: backward Euler, ((1+dt) I - dt D lap) v' = v + dt u, CG solve.
/// Both reactions use the identical per-cell quantity dt u^n f(w^n), so the
/// combined mass sum (u + beta w) * area is exact up to solve residual and
/// the negativity flush.
/// dt is min(stable_dt(...), dt_cap). Throws SolverError, PositivityError,
/// NumericsError or StiffnessError on the respective failures; the input
/// state is untouched on failure.
StepOutcome step(const FieldState& state, const ModelParams& p, const StepControl& ctl,
                 double dt_cap = std::numeric_limits<double>::infinity());

struct StopRule {
  double max_time = 0.0;
  /// Convergence tolerance on N(t) = |u - u*|_inf + |v - u*|_inf + |w|_inf;
  /// absent means run to the time budget.
  std::optional<double> tol_conv;
};

enum class RunClass { converged, budget_exhausted, aborted };
const char* run_class_name(RunClass c);

struct RunReport {
  RunClass classification = RunClass::budget_exhausted;
  double u_star = 0.0;
  double final_norm_u = 0.0;
  double final_norm_v = 0.0;
  double final_norm_w = 0.0;
  double final_norm = 0.0;  // sum of the three components
  double time_reached = 0.0;
  long steps = 0;
  double flushed_mass_total = 0.0;
  double min_v_over_run = 0.0;
  /// min over sampled steps with t > 2; NaN when the run never passes t = 2.
  double min_v_after_t2 = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // nonempty when aborted
};

struct RunCallbacks {
  /// Invoked with the initial state (dt_used = 0), then after every
  /// sampling_stride-th step, and once more after the final step.
  std::function<void(const FieldState&, double dt_used, long step)> on_sample;
  /// Invoked when the run lands exactly on land_times[k].
  std::function<void(const FieldState&, std::size_t k)> on_land;
};

/// Advances by repeated step() until convergence, the time budget, or an
/// abort. u* is computed from the entry state's means (conserved along the
/// flow, so resuming is consistent). land_times must be sorted ascending;
/// the stepper shortens steps to land on each exactly, and on max_time.
RunReport run_until(FieldState state, const ModelParams& p, const StepControl& ctl,
                    const StopRule& stop, long sampling_stride,
                    const RunCallbacks& callbacks = {},
                    std::span<const double> land_times = {});

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Matrix-free Jacobi-preconditioned CG for (sigma I + kappa (-lap)) x = b
/// with the Neumann Laplacian; sigma > 0, kappa >= 0 keeps the operator SPD.
/// x carries the initial guess in and the solution out. Stops at
/// ||r||_2 <= tol ||b||_2; throws SolverError past max_iter.
CgResult solve_helmholtz_neumann(ScalarField& x, const ScalarField& b, double sigma,
                                 double kappa, double tol, int max_iter);

/// Zeroes entries of phi in (-tol, 0) and returns the flushed magnitude sum
/// (plain sum, no area weight). Entries <= -tol raise PositivityError.
double flush_negative(ScalarField& phi, double tol, const char* field_name);

}  // namespace motsim
