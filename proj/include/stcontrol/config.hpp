#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stcontrol/problem.hpp"
#include "stcontrol/study.hpp"

namespace stcontrol {

/// `[section]` headers followed by `key = value` lines; `#` starts a comment
/// and `;` comments out a whole line. Keys before the first header belong to
/// section "". Repeated keys or sections are a ParseError.
using IniSection = std::map<std::string, std::string>;
using IniFile = std::map<std::string, IniSection>;

IniFile parse_ini(std::istream& in);
IniFile parse_ini_file(const std::filesystem::path& path);

/// Builds a problem from a `[problem]` section.
///
/// Keys (all optional): preset, x_min, x_max, T, kappa1, kappa2, eta,
/// offset_a, offset_b, velocity = zero | sine | tabulated,
/// velocity_amplitude, velocity_angular_frequency, velocity_table
/// ("t:v, t:v, ..."), exact = none | zero | example1-static | example1-moving,
/// desired_state = derived | zero | constant:<c> | sinxt.
ProblemSpec problem_from_section(const IniSection& section);

std::vector<int> parse_layer_list(const std::string& text);

struct RunConfig {
  std::string preset = "example1-static";
  std::optional<IniSection> custom_problem;
  std::vector<int> layers{15, 30, 60, 120};
  AdjointSpace adjoint_space = AdjointSpace::U_h;
  int quad_subdiv = 1;
  std::filesystem::path out = "stcontrol-out";
  unsigned seed = 20240601;
  bool serial = false;
  std::optional<int> reference_layers;
  double rho_max = 8.0;
  bool plot = true;

  ProblemSpec problem() const;
  StudyOptions study_options() const;
};

/// Reads sections [problem], [mesh], [solver], [output] of a config file.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace stcontrol
