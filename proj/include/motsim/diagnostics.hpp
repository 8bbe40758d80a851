#pragma once

#include <span>
#include <string>
#include <vector>

#include "motsim/model.hpp"

namespace motsim {

/// One time sample of every monitored quantity. The first fifteen fields plus
/// dt_used form the CSV schema; the trailing integrands are kept for the
/// cumulative accumulator and the nutrient energy identity and are not
/// serialized.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass_u = 0.0;             // sum u * area
  double mass_w = 0.0;
  double mass_combined = 0.0;      // mass_u + beta * mass_w
  double mass_v = 0.0;
  double max_w = 0.0;              // |w|_inf
  double min_v = 0.0;
  double l2_u = 0.0;               // sum u^2 * area
  double dirichlet_v = 0.0;        // discrete integral |grad v|^2
  double dirichlet_u_pow = 0.0;    // |grad u^((m+1)/2)|^2
  double duality_integrand = 0.0;  // sum u^(m+1) v^-alpha * area
  double consumption_rate = 0.0;   // sum u f(w) * area
  double lyapunov = 0.0;           // l2_u + eta * dirichlet_v
  double norm_to_target = 0.0;     // |u-u*|_inf + |v-u*|_inf + |w|_inf
  double dt_used = 0.0;

  double dirichlet_w = 0.0;               // |grad w|^2, feeds the accumulator
  double l2_w = 0.0;                      // sum w^2 * area
  double consumption_rate_weighted = 0.0; // sum u f(w) w * area
};

/// Computes every field with the operators-module quadratures.
DiagnosticsRecord sample(const FieldState& state, const ModelParams& p, double eta,
                         double u_star);

/// Time-cumulative integrals, trapezoidal on the sampling stride.
struct CumulativeIntegrals {
  double consumption_total = 0.0;      // int int u f(w)
  double dirichlet_v_total = 0.0;      // int int |grad v|^2
  double dirichlet_w_total = 0.0;      // int int |grad w|^2
  double dirichlet_u_pow_total = 0.0;  // int int |grad u^((m+1)/2)|^2
};

/// Single-owner accumulator, updated in sampling order. Also tracks the
/// duality integrand over unit-time windows (the per-window integral of
/// sum u^(m+1) v^-alpha) and reports the largest completed window.
class DiagnosticsAccumulator {
 public:
  void update(const DiagnosticsRecord& rec);

  const CumulativeIntegrals& totals() const { return totals_; }
  /// int int u f(w) w, for the nutrient energy identity.
  double consumption_weighted_total() const { return consumption_weighted_total_; }
  /// Largest completed unit-window duality integral; NaN before any window closes.
  double duality_window_peak() const;
  bool has_samples() const { return have_prev_; }

 private:
  bool have_prev_ = false;
  DiagnosticsRecord prev_;
  CumulativeIntegrals totals_;
  double consumption_weighted_total_ = 0.0;

  bool window_open_ = false;
  double window_start_ = 0.0;
  double window_sum_ = 0.0;
  double window_peak_ = 0.0;
  bool window_closed_any_ = false;
};

struct MonotoneVerdict {
  std::string name;
  bool pass = true;
  double worst_violation = 0.0;  // largest signed excess beyond the tolerance-free bound
  double worst_time = 0.0;
};

/// Checks, over a sampled history (>= 2 samples, else std::invalid_argument):
///  (a) mass_combined constant within ctl_tol * scale,
///  (b) mass_u nondecreasing between consecutive samples,
///  (c) max_w nonincreasing between consecutive samples,
///  (d) mass_v <= mass_v(0) + mass_combined(0) + ctl_tol * scale.
std::vector<MonotoneVerdict> check_monotone(std::span<const DiagnosticsRecord> history,
                                            double ctl_tol);

/// Monitoring floor for min v: 0.01 * u0_mass / domain_area. A reporting
/// threshold for flagging suspiciously small v, not an enforced bound.
double delta_floor(double u0_mass, const GridSpec& grid);

}  // namespace motsim
