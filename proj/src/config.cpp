#include "motsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

namespace motsim {

using json = nlohmann::json;

std::vector<std::string> validate_initial(const InitialData& init) {
  std::vector<std::string> errors;
  if (!std::isfinite(init.u0) || !(init.u0 > 0.0))
    errors.push_back("initial.u0 must be positive");
  if (!std::isfinite(init.v0) || !(init.v0 > 0.0))
    errors.push_back("initial.v0 must be positive");
  if (!std::isfinite(init.w0) || init.w0 < 0.0)
    errors.push_back("initial.w0 must be nonnegative");
  if (init.kind != InitialData::Kind::constants) {
    if (!std::isfinite(init.amplitude) || std::abs(init.amplitude) > init.u0)
      errors.push_back("initial.amplitude must satisfy |amplitude| <= u0 to keep u nonnegative");
  }
  if (init.kind == InitialData::Kind::perturbed) {
    if (init.kx < 0 || init.ky < 0)
      errors.push_back("initial mode counts kx, ky must be nonnegative");
  }
  return errors;
}

FieldState build_initial_state(const GridSpec& grid, const InitialData& init,
                               std::uint64_t default_seed) {
  auto errors = validate_initial(init);
  auto gerr = validate_grid(grid);
  errors.insert(errors.end(), gerr.begin(), gerr.end());
  if (!errors.empty()) {
    std::string msg = "invalid initial data:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw std::invalid_argument(msg);
  }

  FieldState s;
  s.t = 0.0;
  s.u = ScalarField(grid, init.u0);
  s.v = ScalarField(grid, init.v0);
  s.w = ScalarField(grid, init.w0);

  switch (init.kind) {
    case InitialData::Kind::constants:
      break;
    case InitialData::Kind::perturbed:
      for (int i = 0; i < grid.nx; ++i) {
        const double cx = std::cos(init.kx * M_PI * grid.x_center(i) / grid.lx);
        for (int j = 0; j < grid.ny; ++j) {
          const double cy = std::cos(init.ky * M_PI * grid.y_center(j) / grid.ly);
          s.u(i, j) = init.u0 + init.amplitude * cx * cy;
        }
      }
      break;
    case InitialData::Kind::random: {
      // Raw mt19937_64 bits mapped to [0,1); distributions from <random> are
      // not bit-identical across standard libraries.
      std::mt19937_64 rng(init.seed.value_or(default_seed));
      for (double& x : s.u.data()) {
        const double xi = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = init.u0 + init.amplitude * (2.0 * xi - 1.0);
      }
      break;
    }
  }

  auto serr = validate_state(s);
  if (!serr.empty()) {
    std::string msg = "initial state invalid:";
    for (const auto& e : serr) msg += " " + e + ";";
    throw std::invalid_argument(msg);
  }
  return s;
}

namespace {

// Strict extraction helpers: every consumed key is checked off, leftovers are
// reported as unknown.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) errors_.push_back(path_ + " must be an object");
  }

  bool has(const char* key) {
    return j_.is_object() && j_.contains(key);
  }

  const json* get(const char* key, bool required = false) {
    if (!j_.is_object()) return nullptr;
    consumed_.push_back(key);
    if (!j_.contains(key)) {
      if (required) errors_.push_back(path_ + "." + key + " is required");
      return nullptr;
    }
    return &j_.at(key);
  }

  double number(const char* key, double fallback, bool required = false) {
    const json* v = get(key, required);
    if (!v) return fallback;
    if (!v->is_number()) {
      errors_.push_back(path_ + "." + key + " must be a number");
      return fallback;
    }
    return v->get<double>();
  }

  long integer(const char* key, long fallback, bool required = false) {
    const json* v = get(key, required);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      errors_.push_back(path_ + "." + key + " must be an integer");
      return fallback;
    }
    return v->get<long>();
  }

  std::string text(const char* key, std::string fallback, bool required = false) {
    const json* v = get(key, required);
    if (!v) return fallback;
    if (!v->is_string()) {
      errors_.push_back(path_ + "." + key + " must be a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  void finish() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(consumed_.begin(), consumed_.end(), it.key()) == consumed_.end())
        errors_.push_back("unknown key: " + (path_.empty() ? it.key() : path_ + "." + it.key()));
    }
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::vector<std::string> consumed_;
};

}  // namespace

ConfigParseResult parse_config(const std::string& text) {
  ConfigParseResult result;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    result.errors.push_back(e.what());
    return result;
  }

  RunConfig cfg;
  auto& errors = result.errors;
  StrictObject top(root, "", errors);

  if (const json* jg = top.get("grid", true)) {
    StrictObject o(*jg, "grid", errors);
    cfg.grid.nx = static_cast<int>(o.integer("nx", 0, true));
    cfg.grid.ny = static_cast<int>(o.integer("ny", 0, true));
    cfg.grid.lx = o.number("lx", 0.0, true);
    cfg.grid.ly = o.number("ly", 0.0, true);
    o.finish();
  }

  if (const json* jp = top.get("params", true)) {
    StrictObject o(*jp, "params", errors);
    cfg.params.m = o.number("m", 0.0, true);
    cfg.params.alpha = o.number("alpha", 0.0, true);
    cfg.params.beta = o.number("beta", 0.0, true);
    cfg.params.d_coef = o.number("d_coef", 0.0, true);
    cfg.params.eps = o.number("eps", 0.0);
    const bool has_cap = o.has("cap_m");
    cfg.params.cap_m = o.number("cap_m", 0.0);
    if (has_cap && cfg.params.eps == 0.0)
      errors.push_back("params.cap_m is only meaningful with eps > 0");
    if (const json* jr = o.get("response")) {
      StrictObject r(*jr, "params.response", errors);
      const std::string kind = r.text("kind", "", true);
      if (kind == "linear") {
        cfg.params.response = ResponseKind::linear();
        if (r.has("lambda"))
          errors.push_back("params.response.lambda is only valid for kind saturating");
      } else if (kind == "saturating") {
        cfg.params.response = ResponseKind::saturating(r.number("lambda", 0.0, true));
      } else if (!kind.empty()) {
        errors.push_back("params.response.kind must be linear or saturating");
      }
      r.finish();
    } else {
      cfg.params.response = ResponseKind::linear();
    }
    o.finish();
  }

  if (const json* jc = top.get("control")) {
    StrictObject o(*jc, "control", errors);
    cfg.control.dt_init = o.number("dt_init", cfg.control.dt_init);
    cfg.control.dt_min = o.number("dt_min", cfg.control.dt_min);
    cfg.control.dt_max = o.number("dt_max", cfg.control.dt_max);
    cfg.control.safety = o.number("safety", cfg.control.safety);
    cfg.control.cg_tol = o.number("cg_tol", cfg.control.cg_tol);
    cfg.control.cg_max_iter =
        static_cast<int>(o.integer("cg_max_iter", cfg.control.cg_max_iter));
    cfg.control.negativity_tol = o.number("negativity_tol", cfg.control.negativity_tol);
    o.finish();
  }

  if (const json* ji = top.get("initial", true)) {
    StrictObject o(*ji, "initial", errors);
    const std::string kind = o.text("kind", "", true);
    if (kind == "constants") {
      cfg.initial.kind = InitialData::Kind::constants;
    } else if (kind == "perturbed") {
      cfg.initial.kind = InitialData::Kind::perturbed;
    } else if (kind == "random") {
      cfg.initial.kind = InitialData::Kind::random;
    } else if (!kind.empty()) {
      errors.push_back("initial.kind must be constants, perturbed or random");
    }
    cfg.initial.u0 = o.number("u0", 0.0, true);
    cfg.initial.v0 = o.number("v0", 0.0, true);
    cfg.initial.w0 = o.number("w0", 0.0, true);
    if (cfg.initial.kind != InitialData::Kind::constants)
      cfg.initial.amplitude = o.number("amplitude", 0.0, true);
    if (cfg.initial.kind == InitialData::Kind::perturbed) {
      cfg.initial.kx = static_cast<int>(o.integer("kx", 1));
      cfg.initial.ky = static_cast<int>(o.integer("ky", 1));
    }
    if (cfg.initial.kind == InitialData::Kind::random && o.has("seed"))
      cfg.initial.seed = static_cast<std::uint64_t>(o.integer("seed", 0));
    o.finish();
  }

  if (const json* js = top.get("stop", true)) {
    StrictObject o(*js, "stop", errors);
    cfg.stop.max_time = o.number("max_time", 0.0, true);
    if (o.has("tol_conv")) cfg.stop.tol_conv = o.number("tol_conv", 0.0);
    o.finish();
    if (cfg.stop.max_time < 0.0) errors.push_back("stop.max_time must be nonnegative");
    if (cfg.stop.tol_conv && !(*cfg.stop.tol_conv > 0.0))
      errors.push_back("stop.tol_conv must be positive");
  }

  cfg.sampling = top.integer("sampling", cfg.sampling);
  if (cfg.sampling < 1) errors.push_back("sampling must be a positive step stride");
  cfg.eta = top.number("eta", cfg.eta);
  if (!(cfg.eta >= 0.0)) errors.push_back("eta must be nonnegative");
  cfg.output_dir = top.text("output_dir", "");
  cfg.seed = static_cast<std::uint64_t>(top.integer("seed", 0));
  if (top.has("v_floor")) cfg.v_floor = top.number("v_floor", 0.0);

  if (const json* jt = top.get("snapshot_times")) {
    if (!jt->is_array()) {
      errors.push_back("snapshot_times must be an array of times");
    } else {
      for (const auto& v : *jt) {
        if (!v.is_number()) {
          errors.push_back("snapshot_times entries must be numbers");
          break;
        }
        cfg.snapshot_times.push_back(v.get<double>());
      }
      if (!std::is_sorted(cfg.snapshot_times.begin(), cfg.snapshot_times.end()))
        errors.push_back("snapshot_times must be sorted ascending");
    }
  }
  top.finish();

  for (const auto& e : validate_grid(cfg.grid)) errors.push_back(e);
  for (const auto& e : validate_params(cfg.params)) errors.push_back(e);
  for (const auto& e : validate_control(cfg.control)) errors.push_back(e);
  for (const auto& e : validate_initial(cfg.initial)) errors.push_back(e);

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

std::string serialize_config(const RunConfig& cfg) {
  json root;
  root["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"lx", cfg.grid.lx},
                  {"ly", cfg.grid.ly}};
  json params = {{"m", cfg.params.m},
                 {"alpha", cfg.params.alpha},
                 {"beta", cfg.params.beta},
                 {"d_coef", cfg.params.d_coef},
                 {"eps", cfg.params.eps}};
  if (cfg.params.eps > 0.0) params["cap_m"] = cfg.params.cap_m;
  if (cfg.params.response.type == ResponseType::linear) {
    params["response"] = {{"kind", "linear"}};
  } else {
    params["response"] = {{"kind", "saturating"}, {"lambda", cfg.params.response.lambda}};
  }
  root["params"] = params;
  root["control"] = {{"dt_init", cfg.control.dt_init},
                     {"dt_min", cfg.control.dt_min},
                     {"dt_max", cfg.control.dt_max},
                     {"safety", cfg.control.safety},
                     {"cg_tol", cfg.control.cg_tol},
                     {"cg_max_iter", cfg.control.cg_max_iter},
                     {"negativity_tol", cfg.control.negativity_tol}};
  json initial;
  switch (cfg.initial.kind) {
    case InitialData::Kind::constants:
      initial = {{"kind", "constants"}};
      break;
    case InitialData::Kind::perturbed:
      initial = {{"kind", "perturbed"},
                 {"amplitude", cfg.initial.amplitude},
                 {"kx", cfg.initial.kx},
                 {"ky", cfg.initial.ky}};
      break;
    case InitialData::Kind::random:
      initial = {{"kind", "random"}, {"amplitude", cfg.initial.amplitude}};
      if (cfg.initial.seed) initial["seed"] = *cfg.initial.seed;
      break;
  }
  initial["u0"] = cfg.initial.u0;
  initial["v0"] = cfg.initial.v0;
  initial["w0"] = cfg.initial.w0;
  root["initial"] = initial;
  json stop = {{"max_time", cfg.stop.max_time}};
  if (cfg.stop.tol_conv) stop["tol_conv"] = *cfg.stop.tol_conv;
  root["stop"] = stop;
  root["sampling"] = cfg.sampling;
  root["eta"] = cfg.eta;
  if (!cfg.output_dir.empty()) root["output_dir"] = cfg.output_dir;
  if (!cfg.snapshot_times.empty()) root["snapshot_times"] = cfg.snapshot_times;
  root["seed"] = cfg.seed;
  if (cfg.v_floor) root["v_floor"] = *cfg.v_floor;
  return root.dump(2) + "\n";
}

}  // namespace motsim
