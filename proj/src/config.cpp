#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tpi/scenario.hpp"

namespace tpi {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::Parse, "config field '" + key + "': cannot parse number from '" + value + "'");
  }
  if (used != value.size())
    fail(ErrorKind::Parse, "config field '" + key + "': trailing characters in '" + value + "'");
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const double d = parse_number(key, value);
  if (d < 0 || d != std::floor(d))
    fail(ErrorKind::Parse, "config field '" + key + "': expected a non-negative integer");
  return static_cast<std::size_t>(d);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  fail(ErrorKind::Parse, "config field '" + key + "': expected true or false, got '" + value + "'");
}

ScenarioKind parse_scenario(const std::string& value) {
  for (const auto& name : scenario_names()) {
    if (value != name) continue;
    if (value == "hom") return ScenarioKind::Hom;
    if (value == "hom_entangled") return ScenarioKind::HomEntangled;
    if (value == "eraser") return ScenarioKind::Eraser;
    if (value == "postponed_compensation") return ScenarioKind::PostponedCompensation;
    if (value == "no_meeting") return ScenarioKind::NoMeeting;
  }
  fail(ErrorKind::Validation, "config field 'scenario': unknown scenario '" + value + "'");
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Parse,
           "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": empty key or value");
    if (kv.count(key))
      fail(ErrorKind::Parse, "config field '" + key + "': duplicated");
    kv[key] = value;
  }

  ScenarioConfig cfg;
  bool scan_range_given = false;
  if (!kv.count("scenario"))
    fail(ErrorKind::Validation, "config field 'scenario': required");
  cfg.scenario = parse_scenario(kv.at("scenario"));
  kv.erase("scenario");

  for (const auto& [key, value] : kv) {
    if (key == "stats") {
      if (value == "boson")
        cfg.stats = ExchangeStatistics::boson();
      else if (value == "fermion")
        cfg.stats = ExchangeStatistics::fermion();
      else
        fail(ErrorKind::Validation, "config field 'stats': expected boson or fermion");
    } else if (key == "center") {
      cfg.center = parse_number(key, value);
    } else if (key == "center_q") {
      cfg.center_q = parse_number(key, value);
    } else if (key == "bandwidth") {
      cfg.bandwidth = parse_number(key, value);
    } else if (key == "grid_min") {
      cfg.grid_min = parse_number(key, value);
    } else if (key == "grid_max") {
      cfg.grid_max = parse_number(key, value);
    } else if (key == "grid_points") {
      cfg.grid_points = parse_count(key, value);
    } else if (key == "window_min") {
      cfg.window_min = parse_number(key, value);
    } else if (key == "window_max") {
      cfg.window_max = parse_number(key, value);
    } else if (key == "window_samples") {
      cfg.window_samples = parse_count(key, value);
    } else if (key == "delta_t") {
      cfg.delta_t = parse_number(key, value);
    } else if (key == "tau1") {
      cfg.tau1 = parse_number(key, value);
    } else if (key == "tau2") {
      cfg.tau2 = parse_number(key, value);
    } else if (key == "tau3") {
      cfg.tau3 = parse_number(key, value);
    } else if (key == "sigma") {
      cfg.sigma = parse_number(key, value);
    } else if (key == "sum_center") {
      cfg.sum_center = parse_number(key, value);
    } else if (key == "diagonal_pbs") {
      cfg.diagonal_pbs = parse_bool(key, value);
    } else if (key == "entangled") {
      cfg.entangled = parse_bool(key, value);
    } else if (key == "channel") {
      if (value == "cross")
        cfg.channel = CoincidenceChannel::Cross;
      else if (value == "same")
        cfg.channel = CoincidenceChannel::Same;
      else
        fail(ErrorKind::Validation, "config field 'channel': expected cross or same");
    } else if (key == "scan") {
      if (value != "delta_t" && value != "tau2" && value != "tau3")
        fail(ErrorKind::Validation, "config field 'scan': expected delta_t, tau2 or tau3");
      cfg.scan_axis = value;
    } else if (key == "scan_min") {
      cfg.scan_min = parse_number(key, value);
      scan_range_given = true;
    } else if (key == "scan_max") {
      cfg.scan_max = parse_number(key, value);
      scan_range_given = true;
    } else if (key == "scan_steps") {
      cfg.scan_steps = parse_count(key, value);
    } else {
      fail(ErrorKind::Validation, "config field '" + key + "': unknown key");
    }
  }

  // Scenario-shaped default scan ranges when none are given.
  if (!scan_range_given) {
    switch (cfg.scenario) {
      case ScenarioKind::Hom:
      case ScenarioKind::HomEntangled:
      case ScenarioKind::Eraser:
        cfg.scan_min = -5.0;
        cfg.scan_max = 5.0;
        break;
      case ScenarioKind::PostponedCompensation:
        cfg.scan_min = 2.0 * cfg.tau1 - 2.0;
        cfg.scan_max = 2.0 * cfg.tau1 + 2.0;
        break;
      case ScenarioKind::NoMeeting:
        cfg.scan_min = cfg.tau1 - 5.0;
        cfg.scan_max = cfg.tau1 + 5.0;
        break;
    }
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace tpi
