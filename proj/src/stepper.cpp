#include "motsim/stepper.hpp"

#include <algorithm>
#include <cmath>

#include "motsim/operators.hpp"

namespace motsim {

std::vector<std::string> validate_control(const StepControl& ctl) {
  std::vector<std::string> errors;
  if (!(ctl.dt_min > 0.0)) errors.push_back("control.dt_min must be positive");
  if (!(ctl.dt_init > 0.0)) errors.push_back("control.dt_init must be positive");
  if (!(ctl.dt_max > 0.0)) errors.push_back("control.dt_max must be positive");
  if (ctl.dt_min > ctl.dt_init || ctl.dt_init > ctl.dt_max)
    errors.push_back("control requires dt_min <= dt_init <= dt_max");
  if (!(ctl.safety > 0.0) || ctl.safety > 1.0)
    errors.push_back("control.safety must lie in (0, 1]");
  if (!(ctl.cg_tol > 0.0)) errors.push_back("control.cg_tol must be positive");
  if (ctl.cg_max_iter <= 0) errors.push_back("control.cg_max_iter must be positive");
  if (ctl.negativity_tol < 0.0)
    errors.push_back("control.negativity_tol must be nonnegative");
  return errors;
}

double stable_dt(const FieldState& state, const ModelParams& p, const StepControl& ctl) {
  const GridSpec& g = state.u.grid();
  const double* u = state.u.data().data();
  const double* v = state.v.data().data();
  double kappa_max = 0.0;
  const std::size_t n = state.u.size();
  if (p.eps == 0.0) {
    // d/du(u^m) v^-alpha = m u^(m-1) v^-alpha; vanishes with u for m > 1.
    if (p.m == 2.0 && p.alpha == 1.0) {
      for (std::size_t c = 0; c < n; ++c)
        kappa_max = std::max(kappa_max, 2.0 * u[c] / v[c]);
    } else {
      for (std::size_t c = 0; c < n; ++c) {
        const double k = p.m * pow_real(u[c], p.m - 1.0) * pow_real(v[c], -p.alpha);
        kappa_max = std::max(kappa_max, k);
      }
    }
  } else {
    for (std::size_t c = 0; c < n; ++c) {
      const double k_reg = p.eps * p.cap_m * pow_real(u[c] + 1.0, p.cap_m - 1.0);
      const double k_mot = (p.m * u[c] + p.eps) * pow_real(u[c] + p.eps, p.m - 2.0) *
                           pow_real(v[c], -p.alpha);
      kappa_max = std::max(kappa_max, k_reg + k_mot);
    }
  }
  const double f_max = response_value(p.response, field_max(state.w));
  const double rho_max = std::max(p.beta * f_max, f_max);
  const double inv_h2 = 1.0 / (g.hx() * g.hx()) + 1.0 / (g.hy() * g.hy());
  const double denom = 4.0 * kappa_max * inv_h2 + rho_max;
  const double raw =
      denom > 0.0 ? ctl.safety / denom : std::numeric_limits<double>::infinity();
  if (raw < ctl.dt_min)
    throw StiffnessError("stable_dt fell below dt_min: dt=" + std::to_string(raw), raw);
  return std::min(raw, ctl.dt_max);
}

double flush_negative(ScalarField& phi, double tol, const char* field_name) {
  double flushed = 0.0;
  const GridSpec& g = phi.grid();
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double x = phi(i, j);
      if (x < 0.0) {
        if (x <= -tol)
          throw PositivityError(std::string(field_name) + " dropped to " +
                                    std::to_string(x) + " at cell (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")",
                                i, j);
        flushed += -x;
        phi(i, j) = 0.0;
      }
    }
  }
  return flushed;
}

namespace {

// y = sigma x + kappa (-lap x), fused to avoid a temporary inside CG.
// Boundary cells take the branchy path, interior cells a branch-free one
// evaluating the identical flux expression.
void apply_shifted_neglap(const GridSpec& g, double sigma, double kappa, const double* x,
                          double* y) {
  const int nx = g.nx;
  const int ny = g.ny;
  const double ax = kappa / (g.hx() * g.hx());
  const double ay = kappa / (g.hy() * g.hy());
  auto edge_cell = [&](int i, int j) {
    const std::size_t c = static_cast<std::size_t>(i) * ny + j;
    const double pc = x[c];
    double fx = 0.0;
    if (i > 0) fx += x[c - ny] - pc;
    if (i + 1 < nx) fx += x[c + ny] - pc;
    double fy = 0.0;
    if (j > 0) fy += x[c - 1] - pc;
    if (j + 1 < ny) fy += x[c + 1] - pc;
    y[c] = sigma * pc - (fx * ax + fy * ay);
  };
  for (int j = 0; j < ny; ++j) edge_cell(0, j);
  for (int i = 1; i + 1 < nx; ++i) {
    edge_cell(i, 0);
    const std::size_t row = static_cast<std::size_t>(i) * ny;
    for (int j = 1; j + 1 < ny; ++j) {
      const std::size_t c = row + j;
      const double pc = x[c];
      const double fx = (x[c - ny] - pc) + (x[c + ny] - pc);
      const double fy = (x[c - 1] - pc) + (x[c + 1] - pc);
      y[c] = sigma * pc - (fx * ax + fy * ay);
    }
    edge_cell(i, ny - 1);
  }
  if (nx > 1)
    for (int j = 0; j < ny; ++j) edge_cell(nx - 1, j);
}

}  // namespace

CgResult solve_helmholtz_neumann(ScalarField& x, const ScalarField& b, double sigma,
                                 double kappa, double tol, int max_iter) {
  const GridSpec& g = x.grid();
  const std::size_t n = x.size();
  const int nx = g.nx;
  const int ny = g.ny;
  const double b_norm_raw = std::sqrt(dot(b.data(), b.data()));
  if (b_norm_raw == 0.0) {
    for (double& xi : x.data()) xi = 0.0;
    return {0, 0.0};
  }

  // Solve in power-of-two rescaled units so the residual reductions never
  // underflow when the field itself is exponentially small (squares of
  // residuals on an O(1e-160) nutrient field land in denormals otherwise).
  // Scaling by 2^k is exact, so in the normal regime this leaves every
  // iterate bit-identical.
  const int b_exp = std::ilogb(b_norm_raw);
  const double unit_scale = std::exp2(std::min(-b_exp, 1023));
  const double unit_unscale = 1.0 / unit_scale;
  ScalarField b_s = b;
  for (double& v : b_s.data()) v *= unit_scale;
  for (double& v : x.data()) v *= unit_scale;
  const double b_norm = std::sqrt(dot(b_s.data(), b_s.data()));

  // Jacobi diagonal of sigma I + kappa (-lap). Only four distinct values on
  // a uniform grid (interior, x edge, y edge, corner); stored inverted.
  const double ax = kappa / (g.hx() * g.hx());
  const double ay = kappa / (g.hy() * g.hy());
  const double inv_int = 1.0 / (sigma + 2.0 * ax + 2.0 * ay);
  const double inv_ex = 1.0 / (sigma + ax + 2.0 * ay);   // x-boundary rows
  const double inv_ey = 1.0 / (sigma + 2.0 * ax + ay);   // y-boundary columns
  const double inv_c = 1.0 / (sigma + ax + ay);
  std::vector<double> inv_diag(n);
  for (int i = 0; i < nx; ++i) {
    const bool xb = i == 0 || i + 1 == nx;
    double* row = inv_diag.data() + static_cast<std::size_t>(i) * ny;
    const double bulk = xb ? inv_ex : inv_int;
    const double edge = xb ? inv_c : inv_ey;
    row[0] = edge;
    for (int j = 1; j + 1 < ny; ++j) row[j] = bulk;
    row[ny - 1] = edge;
  }

  std::vector<double> r(n), p(n), ap(n);
  const double* bd = b_s.data().data();
  double* xd = x.data().data();
  const double* invd = inv_diag.data();
  auto unscale_x = [&] {
    for (double& v : x.data()) v *= unit_unscale;
  };

  apply_shifted_neglap(g, sigma, kappa, xd, ap.data());
  double rz = 0.0, rr = 0.0;
  {
    double z0 = 0, z1 = 0, z2 = 0, z3 = 0, n0 = 0, n1 = 0, n2 = 0, n3 = 0;
    std::size_t c = 0;
    for (; c + 4 <= n; c += 4) {
      const double r0 = bd[c] - ap[c], r1 = bd[c + 1] - ap[c + 1];
      const double r2 = bd[c + 2] - ap[c + 2], r3 = bd[c + 3] - ap[c + 3];
      r[c] = r0; r[c + 1] = r1; r[c + 2] = r2; r[c + 3] = r3;
      p[c] = r0 * invd[c]; p[c + 1] = r1 * invd[c + 1];
      p[c + 2] = r2 * invd[c + 2]; p[c + 3] = r3 * invd[c + 3];
      z0 += r0 * r0 * invd[c]; z1 += r1 * r1 * invd[c + 1];
      z2 += r2 * r2 * invd[c + 2]; z3 += r3 * r3 * invd[c + 3];
      n0 += r0 * r0; n1 += r1 * r1; n2 += r2 * r2; n3 += r3 * r3;
    }
    double zt = 0, nt = 0;
    for (; c < n; ++c) {
      const double rc = bd[c] - ap[c];
      r[c] = rc;
      p[c] = rc * invd[c];
      zt += rc * rc * invd[c];
      nt += rc * rc;
    }
    rz = ((z0 + z2) + (z1 + z3)) + zt;
    rr = ((n0 + n2) + (n1 + n3)) + nt;
  }

  const double stop = tol * b_norm;
  for (int it = 0; it <= max_iter; ++it) {
    const double r_norm = std::sqrt(rr);
    if (r_norm <= stop) {
      unscale_x();
      return {it, r_norm / b_norm};
    }
    if (it == max_iter) {
      unscale_x();
      throw SolverError("cg failed to converge: rel_residual=" +
                            std::to_string(r_norm / b_norm) + " after " +
                            std::to_string(max_iter) + " iterations",
                        r_norm / b_norm, max_iter);
    }
    apply_shifted_neglap(g, sigma, kappa, p.data(), ap.data());
    const double p_ap = dot(p, ap);
    if (!(p_ap > 0.0)) {
      // Exact breakdown: the preconditioned residual underflowed to zero,
      // the iterate cannot improve at working precision.
      unscale_x();
      return {it, r_norm / b_norm};
    }
    const double alpha = rz / p_ap;
    // Fused x/r update with the two residual reductions of the next iterate.
    double rz_new, rr_new;
    {
      double z0 = 0, z1 = 0, z2 = 0, z3 = 0, n0 = 0, n1 = 0, n2 = 0, n3 = 0;
      std::size_t c = 0;
      for (; c + 4 <= n; c += 4) {
        xd[c] += alpha * p[c]; xd[c + 1] += alpha * p[c + 1];
        xd[c + 2] += alpha * p[c + 2]; xd[c + 3] += alpha * p[c + 3];
        const double r0 = r[c] - alpha * ap[c], r1 = r[c + 1] - alpha * ap[c + 1];
        const double r2 = r[c + 2] - alpha * ap[c + 2], r3 = r[c + 3] - alpha * ap[c + 3];
        r[c] = r0; r[c + 1] = r1; r[c + 2] = r2; r[c + 3] = r3;
        z0 += r0 * r0 * invd[c]; z1 += r1 * r1 * invd[c + 1];
        z2 += r2 * r2 * invd[c + 2]; z3 += r3 * r3 * invd[c + 3];
        n0 += r0 * r0; n1 += r1 * r1; n2 += r2 * r2; n3 += r3 * r3;
      }
      double zt = 0, nt = 0;
      for (; c < n; ++c) {
        xd[c] += alpha * p[c];
        const double rc = r[c] - alpha * ap[c];
        r[c] = rc;
        zt += rc * rc * invd[c];
        nt += rc * rc;
      }
      rz_new = ((z0 + z2) + (z1 + z3)) + zt;
      rr_new = ((n0 + n2) + (n1 + n3)) + nt;
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    rr = rr_new;
    for (std::size_t c = 0; c < n; ++c) p[c] = r[c] * invd[c] + beta * p[c];
  }
  return {};  // unreachable
}

StepOutcome step(const FieldState& state, const ModelParams& p, const StepControl& ctl,
                 double dt_cap) {
  const GridSpec& g = state.u.grid();
  const std::size_t n = state.u.size();
  const double dt = std::min(stable_dt(state, p, ctl), dt_cap);

  // Per-cell reaction u^n f(w^n), shared verbatim by the u and w updates so
  // the combined mass exchange is exact.
  ScalarField reaction(g);
  {
    const double* u = state.u.data().data();
    const double* w = state.w.data().data();
    double* rx = reaction.data().data();
    if (p.response.type == ResponseType::linear) {
      for (std::size_t c = 0; c < n; ++c) rx[c] = u[c] * w[c];
    } else {
      const double lam = p.response.lambda;
      for (std::size_t c = 0; c < n; ++c)
        rx[c] = w[c] == 0.0 ? 0.0 : u[c] * (w[c] * w[c]) / (w[c] * w[c] + lam);
    }
  }

  // u: forward Euler, every term at time level n.
  ScalarField u_new = state.u;
  {
    ScalarField div = motility_flux_divergence(state.u, state.v, p);
    double* un = u_new.data().data();
    const double* dv = div.data().data();
    const double* rx = reaction.data().data();
    if (p.eps > 0.0) {
      ScalarField reg = regularization_divergence(state.u, p);
      const double* rg = reg.data().data();
      for (std::size_t c = 0; c < n; ++c) un[c] += dt * (dv[c] + rg[c] + p.beta * rx[c]);
    } else {
      for (std::size_t c = 0; c < n; ++c) un[c] += dt * (dv[c] + p.beta * rx[c]);
    }
  }

  // w: backward Euler diffusion with the explicit sink in the right-hand side.
  ScalarField w_rhs(g);
  for (std::size_t c = 0; c < n; ++c)
    w_rhs.data()[c] = state.w.data()[c] - dt * reaction.data()[c];
  ScalarField w_new = state.w;  // warm start
  const CgResult cg_w =
      solve_helmholtz_neumann(w_new, w_rhs, 1.0, dt, ctl.cg_tol, ctl.cg_max_iter);

  // v: backward Euler for (1+dt) v' - dt D lap v' = v + dt u.
  ScalarField v_rhs(g);
  for (std::size_t c = 0; c < n; ++c)
    v_rhs.data()[c] = state.v.data()[c] + dt * state.u.data()[c];
  ScalarField v_new = state.v;  // warm start
  const CgResult cg_v = solve_helmholtz_neumann(v_new, v_rhs, 1.0 + dt, dt * p.d_coef,
                                                ctl.cg_tol, ctl.cg_max_iter);

  const double flushed_u = flush_negative(u_new, ctl.negativity_tol, "u");
  const double flushed_w = flush_negative(w_new, ctl.negativity_tol, "w");

  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      if (!(v_new(i, j) > 0.0))
        throw PositivityError("v lost positivity at cell (" + std::to_string(i) + "," +
                                  std::to_string(j) + "): " + std::to_string(v_new(i, j)),
                              i, j);
  if (!field_all_finite(u_new) || !field_all_finite(v_new) || !field_all_finite(w_new))
    throw NumericsError("non-finite value after step at t=" + std::to_string(state.t));

  StepOutcome out;
  out.dt_used = dt;
  out.cg_iters_v = cg_v.iterations;
  out.cg_iters_w = cg_w.iterations;
  out.flushed_mass = (flushed_u + p.beta * flushed_w) * g.cell_area();
  out.state.u = std::move(u_new);
  out.state.v = std::move(v_new);
  out.state.w = std::move(w_new);
  out.state.t = state.t + dt;
  return out;
}

const char* run_class_name(RunClass c) {
  switch (c) {
    case RunClass::converged: return "converged";
    case RunClass::budget_exhausted: return "budget_exhausted";
    case RunClass::aborted: return "aborted";
  }
  return "unknown";
}

namespace {

struct TripleNorm {
  double u, v, w, total;
};

// Single fused pass over the three fields.
TripleNorm norm_to_target(const FieldState& s, double u_star) {
  const double* u = s.u.data().data();
  const double* v = s.v.data().data();
  const double* w = s.w.data().data();
  const std::size_t nc = s.u.size();
  double nu = 0.0, nv = 0.0, nw = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    nu = std::max(nu, std::abs(u[c] - u_star));
    nv = std::max(nv, std::abs(v[c] - u_star));
    nw = std::max(nw, std::abs(w[c]));
  }
  return {nu, nv, nw, nu + nv + nw};
}

}  // namespace

RunReport run_until(FieldState state, const ModelParams& p, const StepControl& ctl,
                    const StopRule& stop, long sampling_stride,
                    const RunCallbacks& callbacks, std::span<const double> land_times) {
  RunReport report;
  report.u_star = target_state(field_mean(state.u), field_mean(state.w), p.beta);
  report.min_v_over_run = field_min(state.v);

  long steps = 0;
  long last_sampled_step = -1;
  std::size_t land_idx = 0;
  const double inf = std::numeric_limits<double>::infinity();

  auto emit_sample = [&](double dt_used) {
    if (callbacks.on_sample) callbacks.on_sample(state, dt_used, steps);
    last_sampled_step = steps;
  };
  auto emit_due_landings = [&] {
    while (land_idx < land_times.size() && land_times[land_idx] <= state.t) {
      if (callbacks.on_land) callbacks.on_land(state, land_idx);
      ++land_idx;
    }
  };

  emit_sample(0.0);
  emit_due_landings();

  double last_dt = 0.0;
  try {
    while (true) {
      if (stop.tol_conv &&
          norm_to_target(state, report.u_star).total < *stop.tol_conv) {
        report.classification = RunClass::converged;
        break;
      }
      if (state.t >= stop.max_time) {
        report.classification = RunClass::budget_exhausted;
        break;
      }
      const double next_land = land_idx < land_times.size() ? land_times[land_idx] : inf;
      const double target = std::min(next_land, stop.max_time);
      double dt_cap = target - state.t;
      bool cap_is_landing = true;
      if (steps == 0 && ctl.dt_init < dt_cap) {
        dt_cap = ctl.dt_init;
        cap_is_landing = false;
      }

      StepOutcome out = step(state, p, ctl, dt_cap);
      state = std::move(out.state);
      // Snap onto the landing target when the cap was the binding constraint,
      // so event times are hit exactly rather than within an ulp.
      if (cap_is_landing && out.dt_used == dt_cap) state.t = target;
      ++steps;
      last_dt = out.dt_used;
      report.flushed_mass_total += out.flushed_mass;

      const double vmin = field_min(state.v);
      report.min_v_over_run = std::min(report.min_v_over_run, vmin);
      if (state.t > 2.0)
        report.min_v_after_t2 = std::isnan(report.min_v_after_t2)
                                    ? vmin
                                    : std::min(report.min_v_after_t2, vmin);

      emit_due_landings();
      if (sampling_stride > 0 && steps % sampling_stride == 0) emit_sample(out.dt_used);
    }
  } catch (const SimError& e) {
    report.classification = RunClass::aborted;
    report.error = e.what();
  }

  if (last_sampled_step != steps) emit_sample(last_dt);

  const TripleNorm nrm = norm_to_target(state, report.u_star);
  report.final_norm_u = nrm.u;
  report.final_norm_v = nrm.v;
  report.final_norm_w = nrm.w;
  report.final_norm = nrm.total;
  report.time_reached = state.t;
  report.steps = steps;
  return report;
}

}  // namespace motsim
