#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "motsim/model.hpp"
#include "motsim/stepper.hpp"

namespace motsim {

/// Initial data factories. All variants perturb u only; v and w start uniform.
///  - constants: u = u0, v = v0, w = w0
///  - perturbed: u = u0 + amplitude cos(kx pi x / lx) cos(ky pi y / ly)
///    (Neumann-compatible modes, mean exactly u0)
///  - random:    u = u0 + amplitude xi, xi iid uniform(-1, 1) from mt19937_64
/// Positivity requires u0 > 0, v0 > 0, w0 >= 0 and |amplitude| <= u0.
struct InitialData {
  enum class Kind { constants, perturbed, random };
  Kind kind = Kind::constants;
  double u0 = 1.0;
  double v0 = 1.0;
  double w0 = 0.0;
  double amplitude = 0.0;
  int kx = 1;
  int ky = 1;
  std::optional<std::uint64_t> seed;  // overrides RunConfig::seed when set
};

std::vector<std::string> validate_initial(const InitialData& init);

struct RunConfig {
  GridSpec grid;
  ModelParams params;
  StepControl control;
  InitialData initial;
  StopRule stop;
  long sampling = 50;   // diagnostics stride in steps
  double eta = 1.0;     // Lyapunov weight
  std::string output_dir;
  std::vector<double> snapshot_times;  // sorted ascending
  std::uint64_t seed = 0;
  std::optional<double> v_floor;  // monitoring floor; default delta_floor(...)
};

struct ConfigParseResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty() && config.has_value(); }
};

/// Strict JSON parse: unknown keys are errors, semantic validation is
/// aggregated (grid, params, control, initial, stop). Defaults:
/// control {dt_init 1e-4, dt_min 1e-12, dt_max 1e-2, safety 0.5, cg_tol 1e-10,
/// cg_max_iter 10000, negativity_tol 1e-12}, sampling 50, eta 1.0, seed 0,
/// response {"kind":"linear"}, params.eps 0, snapshot_times [].
ConfigParseResult parse_config(const std::string& text);

/// Canonical JSON serialization; parse(serialize(parse(x))) is the identity.
std::string serialize_config(const RunConfig& cfg);

/// Builds the initial fields; throws std::invalid_argument when the
/// resulting state violates positivity.
FieldState build_initial_state(const GridSpec& grid, const InitialData& init,
                               std::uint64_t default_seed);

}  // namespace motsim
