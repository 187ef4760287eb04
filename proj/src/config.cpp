#include "stcontrol/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stcontrol/errors.hpp"

namespace stcontrol {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double number(const IniSection& section, const std::string& key, double fallback) {
  const auto it = section.find(key);
  if (it == section.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + it->second + "' is not a number");
  }
}

std::string text(const IniSection& section, const std::string& key, const std::string& fallback) {
  const auto it = section.find(key);
  return it == section.end() ? fallback : it->second;
}

int integer(const IniSection& section, const std::string& key, int fallback) {
  const double v = number(section, key, fallback);
  if (v != std::floor(v)) throw ConfigError("key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

TabulatedVelocity parse_velocity_table(const std::string& table) {
  std::vector<double> times, values;
  std::stringstream ss(table);
  for (std::string pair; std::getline(ss, pair, ',');) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) throw ConfigError("velocity_table entries must look like t:v");
    times.push_back(std::stod(trim(pair.substr(0, colon))));
    values.push_back(std::stod(trim(pair.substr(colon + 1))));
  }
  return TabulatedVelocity(std::move(times), std::move(values));
}

}  // namespace

IniFile parse_ini(std::istream& in) {
  // Boost's reader only knows whole-line comments; drop trailing `# ...`
  // first, keeping one output line per input line so error line numbers hold.
  std::stringstream stripped;
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    stripped << line << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(stripped, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.message(), static_cast<int>(e.line()));
  }
  IniFile ini;
  ini[""];
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      ini[""][name] = node.data();  // key before the first section header
      continue;
    }
    IniSection& section = ini[name];
    for (const auto& [key, value] : node) section[key] = value.data();
  }
  return ini;
}

IniFile parse_ini_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse_ini(in);
}

std::vector<int> parse_layer_list(const std::string& list) {
  std::vector<int> out;
  if (const std::string t = trim(list); !t.empty() && t.back() == ',') throw ConfigError("bad layer list '" + list + "'");
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("bad layer count '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty layer list");
  return out;
}

ProblemSpec problem_from_section(const IniSection& s) {
  ProblemSpec spec;
  const std::string preset = text(s, "preset", "");
  std::string exact = "none";
  if (!preset.empty()) {
    spec = make_preset(preset);
    exact = preset;
  }
  spec.name = text(s, "name", preset.empty() ? "custom" : preset);
  spec.x_min = number(s, "x_min", spec.x_min);
  spec.x_max = number(s, "x_max", spec.x_max);
  spec.T = number(s, "T", spec.T);
  spec.kappa1 = number(s, "kappa1", spec.kappa1);
  spec.kappa2 = number(s, "kappa2", spec.kappa2);
  spec.eta = number(s, "eta", spec.eta);
  spec.interface_offsets.first = number(s, "offset_a", spec.interface_offsets.first);
  spec.interface_offsets.second = number(s, "offset_b", spec.interface_offsets.second);

  if (s.contains("velocity")) {
    const std::string v = s.at("velocity");
    if (v == "zero") {
      spec.velocity = ZeroVelocity{};
    } else if (v == "sine") {
      spec.velocity = SineVelocity{number(s, "velocity_amplitude", 0.1 * std::numbers::pi),
                                   number(s, "velocity_angular_frequency", 2.0 * std::numbers::pi)};
    } else if (v == "tabulated") {
      if (!s.contains("velocity_table")) throw ConfigError("velocity = tabulated needs velocity_table");
      spec.velocity = parse_velocity_table(s.at("velocity_table"));
    } else {
      throw ConfigError("unknown velocity '" + v + "' (expected zero, sine or tabulated)");
    }
  }

  exact = text(s, "exact", exact);
  if (exact == "none") {
    spec.exact_state.reset();
    spec.exact_adjoint.reset();
  } else if (exact == "example1-static" || exact == "example1-moving") {
    const auto variant =
        exact == "example1-moving" ? Example1Variant::moving_interface : Example1Variant::static_interface;
    ExactPair pair = example1_exact(variant, spec.eta);
    spec.exact_state = std::move(pair.state);
    spec.exact_adjoint = std::move(pair.adjoint);
  } else if (exact == "zero") {
    const JetField zero = [](double, double) { return Jet{}; };
    spec.exact_state = PiecewiseField{zero, zero};
    spec.exact_adjoint = PiecewiseField{zero, zero};
  } else {
    throw ConfigError("unknown exact solution '" + exact + "'");
  }

  const std::string desired = text(s, "desired_state", spec.has_exact() ? "derived" : "zero");
  if (desired == "derived") {
    spec.desired_state = derive_desired_state(spec);
  } else if (desired == "zero") {
    spec.desired_state = [](double, double) { return 0.0; };
  } else if (desired.rfind("constant:", 0) == 0) {
    const double c = std::stod(desired.substr(9));
    spec.desired_state = [c](double, double) { return c; };
  } else if (desired == "sinxt") {
    const double x0 = spec.x_min, L = spec.x_max - spec.x_min, T = spec.T;
    spec.desired_state = [=](double x, double t) {
      return std::sin(std::numbers::pi * (x - x0) / L) * std::sin(std::numbers::pi * t / T);
    };
  } else {
    throw ConfigError("unknown desired_state '" + desired + "'");
  }
  validate(spec);
  return spec;
}

ProblemSpec RunConfig::problem() const {
  if (custom_problem) return problem_from_section(*custom_problem);
  return make_preset(preset);
}

StudyOptions RunConfig::study_options() const {
  StudyOptions opts;
  opts.solver.adjoint_space = adjoint_space;
  opts.solver.assembly.serial = serial;
  opts.solver.assembly.quad_subdiv = quad_subdiv;
  opts.metric.quad_subdiv = quad_subdiv;
  opts.reference_layers = reference_layers;
  opts.serial = serial;
  return opts;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const IniFile ini = parse_ini_file(path);
  RunConfig cfg;
  if (auto it = ini.find("problem"); it != ini.end()) {
    const IniSection& p = it->second;
    const bool only_preset = p.size() == 1 && p.contains("preset");
    if (only_preset) {
      cfg.preset = p.at("preset");
      make_preset(cfg.preset);  // reject unknown names early
    } else if (!p.empty()) {
      cfg.custom_problem = p;
      problem_from_section(p);
    }
  }
  if (auto it = ini.find("mesh"); it != ini.end()) {
    if (it->second.contains("layers")) cfg.layers = parse_layer_list(it->second.at("layers"));
    cfg.rho_max = number(it->second, "rho_max", cfg.rho_max);
  }
  if (auto it = ini.find("solver"); it != ini.end()) {
    if (it->second.contains("adjoint_space")) cfg.adjoint_space = adjoint_space_from_string(it->second.at("adjoint_space"));
    cfg.quad_subdiv = integer(it->second, "quad_subdiv", cfg.quad_subdiv);
    if (it->second.contains("reference_layers")) cfg.reference_layers = integer(it->second, "reference_layers", 240);
    if (it->second.contains("serial")) cfg.serial = text(it->second, "serial", "false") == "true";
  }
  if (auto it = ini.find("output"); it != ini.end()) {
    cfg.out = text(it->second, "out", cfg.out.string());
    cfg.seed = static_cast<unsigned>(integer(it->second, "seed", static_cast<int>(cfg.seed)));
    if (it->second.contains("plot")) cfg.plot = text(it->second, "plot", "true") == "true";
  }
  for (std::size_t k = 1; k < cfg.layers.size(); ++k)
    if (cfg.layers[k] <= cfg.layers[k - 1]) throw ConfigError("layers must be strictly increasing");
  return cfg;
}

}  // namespace stcontrol
