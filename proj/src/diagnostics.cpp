#include "motsim/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "motsim/operators.hpp"

namespace motsim {

DiagnosticsRecord sample(const FieldState& state, const ModelParams& p, double eta,
                         double u_star) {
  const GridSpec& g = state.u.grid();
  const double area = g.cell_area();
  const std::size_t n = state.u.size();
  const double* u = state.u.data().data();
  const double* v = state.v.data().data();
  const double* w = state.w.data().data();

  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.mass_u = field_integral(state.u);
  rec.mass_w = field_integral(state.w);
  rec.mass_combined = rec.mass_u + p.beta * rec.mass_w;
  rec.mass_v = field_integral(state.v);
  rec.max_w = field_max(state.w);
  rec.min_v = field_min(state.v);
  rec.l2_u = pairwise_sum_n(0, n, [&](std::size_t c) { return u[c] * u[c]; }) * area;
  rec.l2_w = pairwise_sum_n(0, n, [&](std::size_t c) { return w[c] * w[c]; }) * area;
  rec.dirichlet_v = grad_sq_integral(state.v);
  rec.dirichlet_w = grad_sq_integral(state.w);

  ScalarField u_pow(g);
  {
    const double e = 0.5 * (p.m + 1.0);
    double* up = u_pow.data().data();
    for (std::size_t c = 0; c < n; ++c) up[c] = pow_real(u[c], e);
  }
  rec.dirichlet_u_pow = grad_sq_integral(u_pow);

  rec.duality_integrand = weighted_power_integral(state.u, state.v, p.m + 1.0, p.alpha);
  rec.consumption_rate = pairwise_sum_n(0, n, [&](std::size_t c) {
                           return u[c] * response_value(p.response, w[c]);
                         }) *
                         area;
  rec.consumption_rate_weighted =
      pairwise_sum_n(0, n,
                     [&](std::size_t c) {
                       return u[c] * response_value(p.response, w[c]) * w[c];
                     }) *
      area;
  rec.lyapunov = rec.l2_u + eta * rec.dirichlet_v;
  rec.norm_to_target = field_max_abs(state.u, u_star) + field_max_abs(state.v, u_star) +
                       field_max_abs(state.w, 0.0);
  return rec;
}

void DiagnosticsAccumulator::update(const DiagnosticsRecord& rec) {
  if (!have_prev_) {
    have_prev_ = true;
    prev_ = rec;
    window_open_ = true;
    window_start_ = rec.t;
    window_sum_ = 0.0;
    return;
  }
  const double dt = rec.t - prev_.t;
  if (dt <= 0.0) {
    prev_ = rec;
    return;
  }
  const double half = 0.5 * dt;
  totals_.consumption_total += half * (prev_.consumption_rate + rec.consumption_rate);
  totals_.dirichlet_v_total += half * (prev_.dirichlet_v + rec.dirichlet_v);
  totals_.dirichlet_w_total += half * (prev_.dirichlet_w + rec.dirichlet_w);
  totals_.dirichlet_u_pow_total += half * (prev_.dirichlet_u_pow + rec.dirichlet_u_pow);
  consumption_weighted_total_ +=
      half * (prev_.consumption_rate_weighted + rec.consumption_rate_weighted);

  // Unit-time windows of the duality integrand, split at window boundaries
  // by linear interpolation of the integrand.
  double t0 = prev_.t;
  double f0 = prev_.duality_integrand;
  while (window_start_ + 1.0 <= rec.t) {
    const double tb = window_start_ + 1.0;
    const double theta = (tb - prev_.t) / dt;
    const double fb =
        prev_.duality_integrand + theta * (rec.duality_integrand - prev_.duality_integrand);
    window_sum_ += 0.5 * (tb - t0) * (f0 + fb);
    window_peak_ = window_closed_any_ ? std::max(window_peak_, window_sum_) : window_sum_;
    window_closed_any_ = true;
    window_sum_ = 0.0;
    window_start_ = tb;
    t0 = tb;
    f0 = fb;
  }
  window_sum_ += 0.5 * (rec.t - t0) * (f0 + rec.duality_integrand);

  prev_ = rec;
}

double DiagnosticsAccumulator::duality_window_peak() const {
  return window_closed_any_ ? window_peak_
                            : std::numeric_limits<double>::quiet_NaN();
}

std::vector<MonotoneVerdict> check_monotone(std::span<const DiagnosticsRecord> history,
                                            double ctl_tol) {
  if (history.size() < 2)
    throw std::invalid_argument("check_monotone requires at least 2 samples");

  const DiagnosticsRecord& first = history.front();
  auto scale_of = [](double x) { return x != 0.0 ? std::abs(x) : 1.0; };

  MonotoneVerdict combined{"mass_combined_constant", true, 0.0, first.t};
  MonotoneVerdict mass_u_nondec{"mass_u_nondecreasing", true, 0.0, first.t};
  MonotoneVerdict max_w_noninc{"max_w_nonincreasing", true, 0.0, first.t};
  MonotoneVerdict mass_v_bound{"mass_v_bounded", true, 0.0, first.t};

  const double mc_scale = scale_of(first.mass_combined);
  const double mu_scale = scale_of(first.mass_u);
  const double mw_scale = scale_of(first.max_w);
  const double v_bound = first.mass_v + first.mass_combined;
  const double vb_scale = scale_of(v_bound);

  for (std::size_t k = 0; k < history.size(); ++k) {
    const DiagnosticsRecord& rec = history[k];
    const double dev = std::abs(rec.mass_combined - first.mass_combined);
    if (dev > combined.worst_violation) {
      combined.worst_violation = dev;
      combined.worst_time = rec.t;
    }
    const double v_excess = rec.mass_v - v_bound;
    if (v_excess > mass_v_bound.worst_violation) {
      mass_v_bound.worst_violation = v_excess;
      mass_v_bound.worst_time = rec.t;
    }
    if (k > 0) {
      const double drop = history[k - 1].mass_u - rec.mass_u;
      if (drop > mass_u_nondec.worst_violation) {
        mass_u_nondec.worst_violation = drop;
        mass_u_nondec.worst_time = rec.t;
      }
      const double rise = rec.max_w - history[k - 1].max_w;
      if (rise > max_w_noninc.worst_violation) {
        max_w_noninc.worst_violation = rise;
        max_w_noninc.worst_time = rec.t;
      }
    }
  }
  combined.pass = combined.worst_violation <= ctl_tol * mc_scale;
  mass_u_nondec.pass = mass_u_nondec.worst_violation <= ctl_tol * mu_scale;
  max_w_noninc.pass = max_w_noninc.worst_violation <= ctl_tol * mw_scale;
  mass_v_bound.pass = mass_v_bound.worst_violation <= ctl_tol * vb_scale;
  return {combined, mass_u_nondec, max_w_noninc, mass_v_bound};
}

double delta_floor(double u0_mass, const GridSpec& grid) {
  constexpr double kReportingFraction = 0.01;
  return kReportingFraction * u0_mass / grid.domain_area();
}

}  // namespace motsim
