#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "czgrape/analysis.hpp"
#include "czgrape/config.hpp"
#include "czgrape/errors.hpp"
#include "czgrape/io.hpp"

namespace fs = std::filesystem;
using namespace czgrape;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> sets;
  std::int64_t seed = -1;  // negative: keep the config's seed
  int workers = 0;         // 0: one per hardware thread
  bool check_only = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "Config file (TOML)")->required();
  cmd->add_option("--out", a.out_dir, "Output directory (default: cwd)");
  cmd->add_option("--seed", a.seed, "Override the RNG seed")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--workers", a.workers,
                  "Worker threads for scans (0 = auto)");
  cmd->add_option("--set", a.sets,
                  "Override a config key, e.g. --set optimizer.seed=3");
  cmd->add_flag("--check", a.check_only, "Validate the config and exit");
}

std::string out_file(const fs::path& dir, const std::string& basename,
                     const std::string& suffix) {
  return (dir / (basename + suffix)).string();
}

void write_config_echo(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_text_file(out_file(dir, cfg.basename, "_config.toml"),
                  cfg.resolved_text);
}

int cmd_optimize(const RunConfig& cfg, const fs::path& dir) {
  if (!cfg.device) throw ConfigError("optimize needs a [device] section");
  if (!cfg.optimization) throw ConfigError("optimize needs a [pulse] section");
  write_config_echo(cfg, dir);

  ControlPulse start;
  const ControlPulse* start_ptr = nullptr;
  if (!cfg.start_pulse_path.empty()) {
    std::string path = resolve_input_path(cfg, cfg.start_pulse_path);
    LoadedPulse pf = read_pulse_csv(path);
    const OptimizationConfig& oc = *cfg.optimization;
    if (pf.pulse.n_pixels() != oc.n_main_pixels() + 2 * oc.n_buffer ||
        std::abs(pf.pulse.dt_ns - oc.dt_ns) > 1e-9)
      throw ConfigError("start_pulse grid does not match [pulse]: " + path);
    start = pf.pulse;
    start.n_buffer = oc.n_buffer;
    // The CSV supplies the main-window shape; buffers are pinned at this
    // run's parking values regardless of what the file carried there.
    for (int k = 0; k < 2; ++k) {
      double park = oc.resolved_parking_ghz(k, *cfg.device);
      start.buffer_value_ghz[k] = park;
      int total = start.n_pixels();
      for (int j = 0; j < total; ++j)
        if (start.is_buffer(j)) start.channel_ghz[k][j] = park;
    }
    start.validate();
    start_ptr = &start;
  }

  OptimizationResult r = optimize(*cfg.optimization, *cfg.device, start_ptr);

  std::string pulse_file = out_file(dir, cfg.basename, "_pulse.csv");
  write_pulse_csv(pulse_file, r.pulse, cfg.optimization->filter_sigma_ns);
  bool filtered = cfg.optimization->filter_sigma_ns > 0.0;
  std::string filtered_file;
  if (filtered) {
    filtered_file = out_file(dir, cfg.basename, "_filtered.csv");
    write_pulse_csv(filtered_file, r.filtered_pulse, 0.0);
  }

  StateSpace space = StateSpace::two_quanta();
  HamiltonianDecomposition h(space, *cfg.device);
  Trajectory traj;
  propagate(r.filtered_pulse, h, &traj, space.computational_indices()[3]);
  std::string traj_file = out_file(dir, cfg.basename, "_trajectory.csv");
  write_trajectory_csv(traj_file, space, traj);

  nlohmann::ordered_json j;
  j["command"] = "optimize";
  j["config_file"] = cfg.basename + "_config.toml";
  j["pulse_file"] = cfg.basename + "_pulse.csv";
  if (filtered) j["filtered_pulse_file"] = cfg.basename + "_filtered.csv";
  j["trajectory_file"] = cfg.basename + "_trajectory.csv";
  j["seed"] = cfg.optimization->seed;
  auto res = optimization_result_json(r);
  j.update(res);
  write_json_file(out_file(dir, cfg.basename, "_result.json"), j);

  std::cout << "optimize: " << to_string(r.reason) << " after " << r.iterations
            << " iterations, error " << r.final_error << " (wall "
            << r.wall_time_s << " s)\n";
  return r.reason == TerminationReason::target_reached ? 0 : 3;
}

int cmd_scan(const std::string& kind, const RunConfig& cfg, const fs::path& dir,
             int workers) {
  if (!cfg.device) throw ConfigError("scan needs a [device] section");

  ScanResult result;
  if (kind == "qsl") {
    if (!cfg.qsl) throw ConfigError("scan qsl needs a [scan.qsl] section");
    if (!cfg.optimization)
      throw ConfigError("scan qsl needs [pulse] and [optimizer] sections");
    write_config_echo(cfg, dir);
    result = qsl_scan(cfg.qsl->times_ns, *cfg.optimization, *cfg.device,
                      cfg.qsl->options);
  } else {
    const std::string* pulse_path = nullptr;
    if (kind == "noise" && cfg.noise) pulse_path = &cfg.noise->pulse_path;
    if (kind == "calibration" && cfg.calibration)
      pulse_path = &cfg.calibration->pulse_path;
    if (kind == "timing" && cfg.timing) pulse_path = &cfg.timing->pulse_path;
    if (kind == "params" && cfg.params_scan)
      pulse_path = &cfg.params_scan->pulse_path;
    if (!pulse_path)
      throw ConfigError("scan " + kind + " needs a [scan." + kind +
                        "] section");
    write_config_echo(cfg, dir);

    LoadedPulse lp = read_pulse_csv(resolve_input_path(cfg, *pulse_path));
    std::optional<GaussianFilter> filter;
    if (lp.filter_sigma_ns > 0.0)
      filter.emplace(lp.filter_sigma_ns, lp.pulse.dt_ns);
    const GaussianFilter* f = filter ? &*filter : nullptr;

    if (kind == "noise") {
      result = amplitude_noise_scan(lp.pulse, *cfg.device, f,
                                    cfg.noise->sigmas, cfg.noise->n_samples,
                                    cfg.noise->seed, workers);
    } else if (kind == "calibration") {
      result = calibration_scan(lp.pulse, *cfg.device, f,
                                cfg.calibration->offsets1_ghz,
                                cfg.calibration->offsets2_ghz, workers);
    } else if (kind == "timing") {
      result = timing_scan(lp.pulse, *cfg.device, f, cfg.timing->delays_ns,
                           workers);
    } else {
      result = parameter_error_scan(lp.pulse, *cfg.device, f,
                                    cfg.params_scan->g1_rel,
                                    cfg.params_scan->anharm1_rel, workers);
    }
  }

  std::string base = out_file(dir, cfg.basename, "_" + kind);
  write_scan_result(base, result);
  std::cout << "scan " << kind << ": " << result.rows.size() << " points -> "
            << base << ".csv\n";
  return 0;
}

int cmd_jc(const RunConfig& cfg, const fs::path& dir) {
  if (!cfg.jc) throw ConfigError("jc needs a [jc] section");
  write_config_echo(cfg, dir);
  const JcSpec& s = *cfg.jc;

  JcSpectrum spec = jc_spectrum(s.omega_b_ghz, s.anharm_ghz, s.g_ghz,
                                s.deltas_ghz);
  std::string spectrum_file = out_file(dir, cfg.basename, "_jc_spectrum.csv");
  {
    std::string text =
        "delta_ghz,branch1_ghz,branch2_ghz,branch3_ghz,"
        "bare1_ghz,bare2_ghz,bare3_ghz\n";
    for (size_t i = 0; i < spec.delta_ghz.size(); ++i) {
      text += csv_double(spec.delta_ghz[i]);
      for (double v : spec.branches_ghz[i]) text += "," + csv_double(v);
      for (double v : spec.bare_ghz[i]) text += "," + csv_double(v);
      text += "\n";
    }
    write_text_file(spectrum_file, text);
  }

  nlohmann::ordered_json j;
  j["command"] = "jc";
  j["config_file"] = cfg.basename + "_config.toml";
  j["spectrum_file"] = cfg.basename + "_jc_spectrum.csv";

  // The rotation products need a finite swap period.
  if (s.g_ghz > 0.0) {
    StrauchTrace trace = strauch_rotation_trace(s.omega_b_ghz, s.anharm_ghz,
                                                s.g_ghz, s.n_samples);
    std::string pop_file = out_file(dir, cfg.basename, "_jc_populations.csv");
    {
      std::string text = "t_over_t2pi,p20,p11,p02\n";
      for (size_t i = 0; i < trace.time_over_t2pi.size(); ++i) {
        text += csv_double(trace.time_over_t2pi[i]);
        for (double v : trace.populations[i]) text += "," + csv_double(v);
        text += "\n";
      }
      write_text_file(pop_file, text);
    }

    StrauchPhase p3 = strauch_phase_deviation(s.omega_b_ghz, s.anharm_ghz,
                                              s.g_ghz, false, s.n_samples);
    StrauchPhase p2 = strauch_phase_deviation(s.omega_b_ghz, s.anharm_ghz,
                                              s.g_ghz, true, s.n_samples);
    std::string phase_file = out_file(dir, cfg.basename, "_jc_phase.csv");
    {
      std::string text =
          "t_over_t2pi,phase3_rad,defined3,phase2_rad,defined2\n";
      for (size_t i = 0; i < p3.time_over_t2pi.size(); ++i) {
        text += csv_double(p3.time_over_t2pi[i]);
        text += "," + csv_double(p3.phase_rad[i]);
        text += p3.defined[i] ? ",1" : ",0";
        text += "," + csv_double(p2.phase_rad[i]);
        text += p2.defined[i] ? ",1" : ",0";
        text += "\n";
      }
      write_text_file(phase_file, text);
    }

    j["populations_file"] = cfg.basename + "_jc_populations.csv";
    j["phase_file"] = cfg.basename + "_jc_phase.csv";
    j["t_2pi_ns"] = trace.t_2pi_ns;
    j["max_leak_02"] = trace.max_leak_02;
    j["end_phase_deviation_rad"] = p3.end_deviation_from_pi;
    j["end_phase_deviation_rad_two_level"] = p2.end_deviation_from_pi;
    std::cout << "jc: t_2pi " << trace.t_2pi_ns << " ns, max |0,2> population "
              << trace.max_leak_02 << "\n";
  } else {
    std::cout << "jc: g = 0, spectrum only\n";
  }

  write_json_file(out_file(dir, cfg.basename, "_jc.json"), j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "GRAPE pulse optimization for a CZ gate on two bus-coupled qubits"};
  app.require_subcommand(1);

  CommonArgs a;
  std::string kind;

  CLI::App* c_opt = app.add_subcommand("optimize", "Optimize a CZ pulse");
  add_common(c_opt, a);
  CLI::App* c_scan = app.add_subcommand("scan", "Run a landscape scan");
  c_scan
      ->add_option("kind", kind,
                   "One of: qsl, noise, calibration, timing, params")
      ->required()
      ->check(CLI::IsMember({"qsl", "noise", "calibration", "timing",
                             "params"}));
  add_common(c_scan, a);
  CLI::App* c_jc =
      app.add_subcommand("jc", "Jaynes-Cummings ladder data products");
  add_common(c_jc, a);
  CLI::App* c_check = app.add_subcommand("check", "Validate a config");
  add_common(c_check, a);

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<std::uint64_t> seed_override;
    if (a.seed >= 0) seed_override = static_cast<std::uint64_t>(a.seed);
    RunConfig cfg = load_config(a.config_path, a.sets, seed_override);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";

    if (app.got_subcommand(c_check) || a.check_only) {
      std::cout << "config OK: " << a.config_path << "\n";
      return 0;
    }

    int workers = a.workers;
    if (workers <= 0)
      workers = std::max(1u, std::thread::hardware_concurrency());

    if (app.got_subcommand(c_opt)) return cmd_optimize(cfg, a.out_dir);
    if (app.got_subcommand(c_scan)) return cmd_scan(kind, cfg, a.out_dir, workers);
    if (app.got_subcommand(c_jc)) return cmd_jc(cfg, a.out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
