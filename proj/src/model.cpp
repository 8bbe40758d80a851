#include "motsim/model.hpp"

#include <cmath>
#include <sstream>

namespace motsim {

double response_value(const ResponseKind& k, double w) {
  if (w < 0.0) throw std::domain_error("response_value: w must be nonnegative");
  switch (k.type) {
    case ResponseType::saturating:
      // w^2/(w^2+lambda); exact zero at w = 0.
      return w == 0.0 ? 0.0 : (w * w) / (w * w + k.lambda);
    case ResponseType::linear:
      return w;
  }
  return 0.0;
}

namespace {

std::string fmt(double x) {
  std::ostringstream ss;
  ss << x;
  return ss.str();
}

}  // namespace

std::vector<std::string> validate_params(const ModelParams& p) {
  std::vector<std::string> errors;
  if (!std::isfinite(p.m) || !(p.m > 1.0))
    errors.push_back("m must exceed 1 (got " + fmt(p.m) + ")");
  if (!std::isfinite(p.alpha) || !(p.alpha > 0.0))
    errors.push_back("alpha must be positive (got " + fmt(p.alpha) + ")");
  if (!std::isfinite(p.beta) || !(p.beta > 0.0))
    errors.push_back("beta must be positive (got " + fmt(p.beta) + ")");
  if (!std::isfinite(p.d_coef) || !(p.d_coef > 0.0))
    errors.push_back("d_coef must be positive (got " + fmt(p.d_coef) + ")");
  if (!std::isfinite(p.eps) || p.eps < 0.0)
    errors.push_back("eps must be nonnegative (got " + fmt(p.eps) + ")");
  if (p.eps > 0.0) {
    if (!std::isfinite(p.cap_m) || !(p.cap_m > p.m))
      errors.push_back("M must exceed m when eps > 0 (got M=" + fmt(p.cap_m) +
                       ", m=" + fmt(p.m) + ")");
  }
  if (p.response.type == ResponseType::saturating) {
    if (!std::isfinite(p.response.lambda) || !(p.response.lambda > 0.0))
      errors.push_back("response.lambda must be positive (got " + fmt(p.response.lambda) +
                       ")");
  }
  return errors;
}

double target_state(double u0_mean, double w0_mean, double beta) {
  if (!(u0_mean > 0.0))
    throw std::domain_error("target_state: u0_mean must be positive");
  return u0_mean + beta * w0_mean;
}

std::vector<std::string> validate_state(const FieldState& s) {
  std::vector<std::string> errors;
  if (!s.u.same_shape(s.v) || !s.u.same_shape(s.w)) {
    errors.push_back("state fields must share one grid");
    return errors;
  }
  if (s.t < 0.0 || !std::isfinite(s.t)) errors.push_back("state time must be finite and >= 0");
  const auto& g = s.u.grid();
  for (auto es : validate_grid(g)) errors.push_back(es);
  if (!field_all_finite(s.u)) errors.push_back("u contains non-finite entries");
  if (!field_all_finite(s.v)) errors.push_back("v contains non-finite entries");
  if (!field_all_finite(s.w)) errors.push_back("w contains non-finite entries");
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (s.u(i, j) < 0.0) {
        errors.push_back("u must be nonnegative (cell " + std::to_string(i) + "," +
                         std::to_string(j) + ")");
        i = g.nx;
        break;
      }
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (!(s.v(i, j) > 0.0)) {
        errors.push_back("v must be positive (cell " + std::to_string(i) + "," +
                         std::to_string(j) + ")");
        i = g.nx;
        break;
      }
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (s.w(i, j) < 0.0) {
        errors.push_back("w must be nonnegative (cell " + std::to_string(i) + "," +
                         std::to_string(j) + ")");
        i = g.nx;
        break;
      }
    }
  }
  return errors;
}

}  // namespace motsim
