#include "motsim/run.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "motsim/oracle.hpp"
#include "motsim/snapshot.hpp"

namespace motsim {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

const char* const kDiagnosticsCsvHeader =
    "t,mass_u,mass_w,mass_combined,mass_v,max_w,min_v,l2_u,dirichlet_v,"
    "dirichlet_u_pow,duality_integrand,consumption_rate,consumption_total,"
    "lyapunov,norm_to_target,dt_used";

void write_csv_row(std::ostream& out, const DiagnosticsRecord& rec,
                   const CumulativeIntegrals& totals) {
  out << format_g17(rec.t) << ',' << format_g17(rec.mass_u) << ','
      << format_g17(rec.mass_w) << ',' << format_g17(rec.mass_combined) << ','
      << format_g17(rec.mass_v) << ',' << format_g17(rec.max_w) << ','
      << format_g17(rec.min_v) << ',' << format_g17(rec.l2_u) << ','
      << format_g17(rec.dirichlet_v) << ',' << format_g17(rec.dirichlet_u_pow) << ','
      << format_g17(rec.duality_integrand) << ',' << format_g17(rec.consumption_rate)
      << ',' << format_g17(totals.consumption_total) << ',' << format_g17(rec.lyapunov)
      << ',' << format_g17(rec.norm_to_target) << ',' << format_g17(rec.dt_used) << '\n';
}

namespace {

json json_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

void write_report_json(const fs::path& path, const RunArtifacts& art) {
  const RunReport& r = art.report;
  json root;
  root["classification"] = run_class_name(r.classification);
  root["u_star"] = r.u_star;
  root["final_norms"] = {{"u", r.final_norm_u},
                         {"v", r.final_norm_v},
                         {"w", r.final_norm_w},
                         {"total", r.final_norm}};
  root["time_reached"] = r.time_reached;
  root["steps"] = r.steps;
  root["flushed_mass_total"] = r.flushed_mass_total;
  root["min_v_over_run"] = r.min_v_over_run;
  root["min_v_after_t2"] = json_or_null(r.min_v_after_t2);
  root["v_floor"] = art.v_floor;
  root["v_floor_breached"] = art.v_floor_breached;
  root["duality_window_peak"] = json_or_null(art.duality_window_peak);
  if (!r.error.empty()) root["error"] = r.error;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << root.dump(2) << "\n";
  if (!out) throw IoError("failed writing report: " + path.string());
}

std::string d_label(double d) {
  std::string s = format_g17(d);
  // %.17g of a round value like 4 is "4"; keep directory names tidy.
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", d);
  return buf;
}

}  // namespace

RunArtifacts execute_run(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  RunArtifacts art;
  art.duality_window_peak = std::numeric_limits<double>::quiet_NaN();

  FieldState state;
  try {
    state = build_initial_state(cfg.grid, cfg.initial, cfg.seed);
  } catch (const std::invalid_argument& e) {
    art.exit_code = kExitAborted;
    art.error = e.what();
    if (!quiet) std::cerr << "error: " << e.what() << "\n";
    return art;
  }

  const double u_star = target_state(field_mean(state.u), field_mean(state.w),
                                     cfg.params.beta);
  art.v_floor = cfg.v_floor.value_or(delta_floor(field_integral(state.u), cfg.grid));

  std::ofstream csv;
  try {
    fs::create_directories(out_dir);
    csv.open(fs::path(out_dir) / "diagnostics.csv", std::ios::trunc);
    if (!csv) throw IoError("cannot open diagnostics.csv under " + out_dir);
  } catch (const std::exception& e) {
    art.exit_code = kExitIo;
    art.error = e.what();
    if (!quiet) std::cerr << "error: " << e.what() << "\n";
    return art;
  }
  csv << kDiagnosticsCsvHeader << '\n';

  DiagnosticsAccumulator acc;
  RunCallbacks cb;
  cb.on_sample = [&](const FieldState& s, double dt_used, long) {
    DiagnosticsRecord rec = sample(s, cfg.params, cfg.eta, u_star);
    rec.dt_used = dt_used;
    acc.update(rec);
    write_csv_row(csv, rec, acc.totals());
  };
  cb.on_land = [&](const FieldState& s, std::size_t k) {
    char name[32];
    std::snprintf(name, sizeof(name), "snapshot_%03zu.ksf", k);
    write_snapshot(s, fs::path(out_dir) / name);
  };

  art.report = run_until(std::move(state), cfg.params, cfg.control, cfg.stop,
                         cfg.sampling, cb, cfg.snapshot_times);
  art.totals = acc.totals();
  art.duality_window_peak = acc.duality_window_peak();
  // Floor monitoring applies past the start-up interval (t > 2) only.
  art.v_floor_breached = !std::isnan(art.report.min_v_after_t2) &&
                         art.report.min_v_after_t2 < art.v_floor;

  csv.flush();
  if (!csv) {
    art.exit_code = kExitIo;
    art.error = "failed writing diagnostics.csv";
    return art;
  }

  try {
    write_report_json(fs::path(out_dir) / "report.json", art);
  } catch (const IoError& e) {
    art.exit_code = kExitIo;
    art.error = e.what();
    return art;
  }

  switch (art.report.classification) {
    case RunClass::converged: art.exit_code = kExitConverged; break;
    case RunClass::budget_exhausted: art.exit_code = kExitBudget; break;
    case RunClass::aborted: art.exit_code = kExitAborted; break;
  }

  if (!quiet) {
    std::cout << "classification: " << run_class_name(art.report.classification) << "\n"
              << "u_star: " << format_g17(art.report.u_star) << "\n"
              << "norm_to_target: " << format_g17(art.report.final_norm) << "\n"
              << "time_reached: " << format_g17(art.report.time_reached)
              << "  steps: " << art.report.steps << "\n";
    if (art.v_floor_breached)
      std::cout << "warning: min v " << format_g17(art.report.min_v_after_t2)
                << " fell below the monitoring floor " << format_g17(art.v_floor)
                << " after t=2\n";
    if (!art.report.error.empty()) std::cerr << "error: " << art.report.error << "\n";
  }
  return art;
}

int run_command(const RunConfig& cfg, const std::string& out_dir) {
  return execute_run(cfg, out_dir, /*quiet=*/false).exit_code;
}

SweepResult sweep_command(const RunConfig& cfg, std::span<const double> d_values,
                          const std::string& out_dir, int threads) {
  SweepResult result;
  if (d_values.empty()) {
    result.exit_code = kExitAborted;
    std::cerr << "error: sweep requires at least one D value\n";
    return result;
  }
  for (double d : d_values) {
    if (!(d > 0.0)) {
      result.exit_code = kExitAborted;
      std::cerr << "error: sweep D values must be positive\n";
      return result;
    }
  }

  try {
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    result.exit_code = kExitIo;
    std::cerr << "error: " << e.what() << "\n";
    return result;
  }

  result.rows.resize(d_values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= d_values.size()) return;
      RunConfig run_cfg = cfg;
      run_cfg.params.d_coef = d_values[k];
      const std::string dir = (fs::path(out_dir) / ("D_" + d_label(d_values[k]))).string();
      SweepRow& row = result.rows[k];
      row.d_coef = d_values[k];
      try {
        RunArtifacts art = execute_run(run_cfg, dir, /*quiet=*/true);
        const bool never_ran = !art.error.empty();  // validation or io failure
        if (never_ran) {
          row.classification = "error";
          row.error = art.error;
          row.final_norm = std::numeric_limits<double>::quiet_NaN();
          row.time_to_tolerance = std::numeric_limits<double>::infinity();
        } else {
          row.classification = run_class_name(art.report.classification);
          row.final_norm = art.report.final_norm;
          row.time_to_tolerance = art.report.classification == RunClass::converged
                                      ? art.report.time_reached
                                      : std::numeric_limits<double>::infinity();
          row.error = art.report.error;
        }
      } catch (const std::exception& e) {
        row.classification = "error";
        row.error = e.what();
        row.final_norm = std::numeric_limits<double>::quiet_NaN();
        row.time_to_tolerance = std::numeric_limits<double>::infinity();
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(threads, static_cast<int>(d_values.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int k = 0; k < n_workers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const SweepRow& row : result.rows) {
    if (row.classification == "converged" && !result.threshold_candidate)
      result.threshold_candidate = row.d_coef;
  }

  std::ostringstream table;
  table << "d_coef,classification,final_norm,time_to_tolerance\n";
  for (const SweepRow& row : result.rows)
    table << format_g17(row.d_coef) << ',' << row.classification << ','
          << format_g17(row.final_norm) << ',' << format_g17(row.time_to_tolerance)
          << '\n';

  try {
    std::ofstream csv(fs::path(out_dir) / "sweep.csv", std::ios::trunc);
    if (!csv) throw IoError("cannot write sweep.csv under " + out_dir);
    csv << table.str();
    json summary;
    summary["threshold_candidate"] =
        result.threshold_candidate ? json(*result.threshold_candidate) : json(nullptr);
    json rows = json::array();
    for (const SweepRow& row : result.rows) {
      json jr = {{"d_coef", row.d_coef},
                 {"classification", row.classification},
                 {"final_norm", json_or_null(row.final_norm)},
                 {"time_to_tolerance", std::isinf(row.time_to_tolerance)
                                           ? json(nullptr)
                                           : json(row.time_to_tolerance)}};
      if (!row.error.empty()) jr["error"] = row.error;
      rows.push_back(jr);
    }
    summary["runs"] = rows;
    std::ofstream js(fs::path(out_dir) / "sweep.json", std::ios::trunc);
    if (!js) throw IoError("cannot write sweep.json under " + out_dir);
    js << summary.dump(2) << "\n";
  } catch (const std::exception& e) {
    result.exit_code = kExitIo;
    std::cerr << "error: " << e.what() << "\n";
    return result;
  }

  std::cout << table.str();
  if (result.threshold_candidate) {
    std::cout << "smallest converged D: " << format_g17(*result.threshold_candidate)
              << "\n";
  } else {
    std::cout << "no D value converged\n";
  }
  result.exit_code = 0;
  return result;
}

int oracle_command(const RunConfig& cfg, std::ostream& out) {
  FieldState state;
  try {
    state = build_initial_state(cfg.grid, cfg.initial, cfg.seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAborted;
  }
  OdeState s0{field_mean(state.u), field_mean(state.v), field_mean(state.w), 0.0};
  std::vector<OdeState> traj;
  try {
    traj = ode_integrate(s0, cfg.params, cfg.stop.max_time, cfg.control.dt_init);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAborted;
  }
  out << "t,u,v,w\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (k % static_cast<std::size_t>(cfg.sampling) != 0 && k + 1 != traj.size()) continue;
    out << format_g17(traj[k].t) << ',' << format_g17(traj[k].u) << ','
        << format_g17(traj[k].v) << ',' << format_g17(traj[k].w) << '\n';
  }
  return kExitConverged;
}

}  // namespace motsim
