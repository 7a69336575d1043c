#include "czgrape/io.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "czgrape/errors.hpp"
#include "czgrape/toml_lite.hpp"

namespace czgrape {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError(path + ":" + std::to_string(line) +
                      ": not a number: " + s);
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace

std::string csv_double(double x) { return toml::format_double(x); }

void write_pulse_csv(const std::string& path, const ControlPulse& pulse,
                     double filter_sigma_ns) {
  auto out = open_out(path);
  out << "# czgrape pulse v1\n";
  out << "# dt_ns = " << csv_double(pulse.dt_ns) << "\n";
  out << "# n_buffer = " << pulse.n_buffer << "\n";
  out << "# parking1_ghz = " << csv_double(pulse.buffer_value_ghz[0]) << "\n";
  out << "# parking2_ghz = " << csv_double(pulse.buffer_value_ghz[1]) << "\n";
  out << "# filter_sigma_ns = " << csv_double(filter_sigma_ns) << "\n";
  out << "time_ns,delta1_ghz,delta2_ghz\n";
  for (int j = 0; j < pulse.n_pixels(); ++j) {
    out << csv_double((j + 0.5) * pulse.dt_ns) << ","
        << csv_double(pulse.channel_ghz[0][j]) << ","
        << csv_double(pulse.channel_ghz[1][j]) << "\n";
  }
  finish(out, path);
}

LoadedPulse read_pulse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pulse file: " + path);
  std::map<std::string, std::string> meta;
  LoadedPulse loaded;
  ControlPulse& pulse = loaded.pulse;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      std::string body = trim(s.substr(1));
      size_t eq = body.find('=');
      if (eq != std::string::npos)
        meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (s != "time_ns,delta1_ghz,delta2_ghz")
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": expected header time_ns,delta1_ghz,delta2_ghz");
      header_seen = true;
      continue;
    }
    auto fields = split_csv(s);
    if (fields.size() != 3)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 3 columns");
    pulse.channel_ghz[0].push_back(parse_double(fields[1], path, line_no));
    pulse.channel_ghz[1].push_back(parse_double(fields[2], path, line_no));
  }
  if (!header_seen || pulse.channel_ghz[0].empty())
    throw ConfigError(path + ": no pulse samples found");

  auto require = [&](const std::string& key) -> std::string {
    auto it = meta.find(key);
    if (it == meta.end())
      throw ConfigError(path + ": missing preamble entry " + key);
    return it->second;
  };
  pulse.dt_ns = parse_double(require("dt_ns"), path, 0);
  pulse.n_buffer =
      static_cast<int>(parse_double(require("n_buffer"), path, 0));
  pulse.buffer_value_ghz[0] = parse_double(require("parking1_ghz"), path, 0);
  pulse.buffer_value_ghz[1] = parse_double(require("parking2_ghz"), path, 0);
  auto it = meta.find("filter_sigma_ns");
  loaded.filter_sigma_ns =
      it == meta.end() ? 0.0 : parse_double(it->second, path, 0);
  pulse.validate();
  return loaded;
}

AnharmonicityModel read_anharm_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open anharmonicity table: " + path);
  std::vector<double> x, y;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (!header_seen) {
      if (s != "delta_ghz,anharmonicity_ghz")
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": expected header delta_ghz,anharmonicity_ghz");
      header_seen = true;
      continue;
    }
    auto fields = split_csv(s);
    if (fields.size() != 2)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 2 columns");
    x.push_back(parse_double(fields[0], path, line_no));
    y.push_back(parse_double(fields[1], path, line_no));
  }
  if (x.size() < 2)
    throw ConfigError(path + ": need at least two table rows");
  return AnharmonicityModel::tabulated(std::move(x), std::move(y));
}

void write_scan_result(const std::string& path_base, const ScanResult& r) {
  {
    auto out = open_out(path_base + ".csv");
    std::string header;
    for (const auto& axis : r.axes) {
      if (!header.empty()) header += ",";
      header += axis.name;
    }
    for (const auto& col : r.columns) {
      if (!header.empty()) header += ",";
      header += col;
    }
    out << header << "\n";
    for (const auto& row : r.rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) out << ",";
        out << csv_double(row[i]);
      }
      out << "\n";
    }
    finish(out, path_base + ".csv");
  }
  nlohmann::ordered_json j;
  j["axes"] = nlohmann::ordered_json::array();
  for (const auto& axis : r.axes) {
    nlohmann::ordered_json a;
    a["name"] = axis.name;
    a["unit"] = axis.unit;
    a["values"] = axis.values;
    j["axes"].push_back(a);
  }
  j["columns"] = r.columns;
  j["n_rows"] = r.rows.size();
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metadata) j["metadata"][k] = v;
  write_json_file(path_base + ".json", j);
}

void write_trajectory_csv(const std::string& path, const StateSpace& space,
                          const Trajectory& traj) {
  auto out = open_out(path);
  out << "time_ns";
  for (const auto& state : space.states()) out << ",p_" << state.label();
  out << "\n";
  for (size_t i = 0; i < traj.times_ns.size(); ++i) {
    out << csv_double(traj.times_ns[i]);
    const auto& p = traj.populations[i];
    for (int k = 0; k < p.size(); ++k) out << "," << csv_double(p[k]);
    out << "\n";
  }
  finish(out, path);
}

nlohmann::ordered_json optimization_result_json(const OptimizationResult& r) {
  nlohmann::ordered_json j;
  j["termination_reason"] = to_string(r.reason);
  j["iterations"] = r.iterations;
  j["final_error"] = r.final_error;
  j["final_fidelity"] = 1.0 - r.final_error;
  j["final_grad_inf_norm"] = r.final_grad_norm;
  j["error_history"] = r.error_history;
  j["grad_inf_norms"] = r.grad_norms;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

void write_json_file(const std::string& path,
                     const nlohmann::ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
  finish(out, path);
}

}  // namespace czgrape
