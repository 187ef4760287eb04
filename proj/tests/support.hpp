// Shared helpers for the test binaries.
#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "stcontrol/mesh.hpp"
#include "stcontrol/problem.hpp"

namespace testing {

inline constexpr double pi = std::numbers::pi;

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() / ("stcontrol-" + tag + "-" + std::to_string(stamp));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Example 1 box with unit coefficients and zero data; handy for pure-geometry checks.
inline stcontrol::ProblemSpec unit_problem(double kappa1 = 1.0, double kappa2 = 1.0) {
  stcontrol::ProblemSpec spec;
  spec.kappa1 = kappa1;
  spec.kappa2 = kappa2;
  spec.desired_state = [](double, double) { return 0.0; };
  return spec;
}

inline double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace testing
