#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "motsim/grid.hpp"

namespace motsim {

/// Base class for runtime failures raised while stepping or solving.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A field value violated a sign constraint; carries the offending cell.
struct PositivityError : SimError {
  PositivityError(const std::string& msg, int i, int j)
      : SimError(msg), cell_i(i), cell_j(j) {}
  int cell_i = -1;
  int cell_j = -1;
};

/// Linear solve failed to reach tolerance within the iteration cap.
struct SolverError : SimError {
  SolverError(const std::string& msg, double residual, int iters)
      : SimError(msg), final_residual(residual), iterations(iters) {}
  double final_residual = 0.0;
  int iterations = 0;
};

/// Explicit stability bound fell below the configured dt_min.
struct StiffnessError : SimError {
  StiffnessError(const std::string& msg, double dt) : SimError(msg), dt_computed(dt) {}
  double dt_computed = 0.0;
};

/// NaN or Inf appeared in a field.
struct NumericsError : SimError {
  using SimError::SimError;
};

enum class ResponseType { saturating, linear };

/// Consumption response f(w): f(0) = 0, f > 0 and f' > 0 on (0,inf).
/// The saturating variant is f(w) = w^2 / (w^2 + lambda); the linear variant
/// f(w) = w keeps the homogeneous ODE reduction analytically solvable.
struct ResponseKind {
  ResponseType type = ResponseType::linear;
  double lambda = 0.0;  // half-saturation constant, saturating variant only

  static ResponseKind saturating(double lambda_) {
    return ResponseKind{ResponseType::saturating, lambda_};
  }
  static ResponseKind linear() { return ResponseKind{ResponseType::linear, 0.0}; }

  bool operator==(const ResponseKind&) const = default;
};

/// f(w); throws std::domain_error for w < 0.
double response_value(const ResponseKind& k, double w);

/// Full parameter set of the coupled system
///   u_t = eps lap (u+1)^M + lap( u (u+eps)^(m-1) v^-alpha ) + beta u f(w)
///   v_t = D lap v + u - v
///   w_t = lap w - u f(w)
/// eps = 0 selects the limit system u_t = lap(u^m / v^alpha) + beta u f(w).
struct ModelParams {
  double m = 2.0;       // diffusion exponent, > 1
  double alpha = 1.0;   // motility-suppression exponent, > 0
  double beta = 1.0;    // growth coefficient, > 0
  double d_coef = 1.0;  // signal diffusivity D, > 0
  double eps = 0.0;     // regularization strength, >= 0
  double cap_m = 0.0;   // regularization exponent M, required > m when eps > 0
  ResponseKind response;
};

/// Complete list of violated parameter constraints; empty means ok.
std::vector<std::string> validate_params(const ModelParams& p);

/// Uniform limit value u* = mean(u0) + beta * mean(w0).
/// Throws std::domain_error when u0_mean <= 0 (initial mass must be positive).
double target_state(double u0_mean, double w0_mean, double beta);

/// The simulated triple (u, v, w) plus the simulation clock.
struct FieldState {
  ScalarField u;  // population density, >= 0
  ScalarField v;  // signal concentration, > 0
  ScalarField w;  // nutrient, >= 0
  double t = 0.0;
};

/// Shape, sign and finiteness checks for a state; empty means ok.
std::vector<std::string> validate_state(const FieldState& s);

}  // namespace motsim
