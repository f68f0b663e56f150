#pragma once

// Serialization of accuracy reports: JSON plus an aligned text table.

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amie/simkit.hpp"

namespace amie::sim {

// Reference per-axis errors (percent of extent) the sweep is scored against.
inline constexpr double kTargetPercentX = 11.6;
inline constexpr double kTargetPercentY = 14.7;

inline nlohmann::json to_json(const ModelAccuracy& m) {
  return {{"name", m.name},
          {"mean_abs_error_x_m", m.mean_abs_error_x},
          {"mean_abs_error_y_m", m.mean_abs_error_y},
          {"percent_error_x", m.percent_error_x},
          {"percent_error_y", m.percent_error_y},
          {"accuracy_percent", m.accuracy_percent},
          {"failures", m.failures},
          {"fallback_trials", m.fallback_trials}};
}

inline nlohmann::json to_json(const AccuracyReport& r) {
  nlohmann::json j;
  j["trials"] = r.trials;
  j["sigma_db"] = r.sigma;
  j["seed"] = r.seed;
  j["extent_x_m"] = r.extent_x;
  j["extent_y_m"] = r.extent_y;
  j["models"] = nlohmann::json::array();
  for (const auto& m : r.models) j["models"].push_back(to_json(m));
  if (r.models.size() >= 2) {
    j["delta"] = {{"models", r.models[0].name + " - " + r.models[1].name},
                  {"accuracy_percent", r.models[0].accuracy_percent - r.models[1].accuracy_percent}};
  }
  return j;
}

/// Squared distance, in percentage points, from the reference per-axis errors.
inline double target_distance(const ModelAccuracy& m) {
  const double dx = m.percent_error_x - kTargetPercentX;
  const double dy = m.percent_error_y - kTargetPercentY;
  return dx * dx + dy * dy;
}

/// Index of the run whose `model` comes closest to the target errors.
inline std::size_t calibrated_run(const std::vector<AccuracyReport>& runs, const std::string& model) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (const auto& m : runs[i].models)
      if (m.name == model && target_distance(m) < best_d) {
        best_d = target_distance(m);
        best = i;
      }
  return best;
}

inline nlohmann::json sweep_to_json(const std::vector<AccuracyReport>& runs, const std::string& reference_model) {
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) j["runs"].push_back(to_json(r));
  if (!runs.empty()) {
    j["calibrated_sigma_db"] = runs[calibrated_run(runs, reference_model)].sigma;
    j["calibration_model"] = reference_model;
    j["target_percent_error"] = {{"x", kTargetPercentX}, {"y", kTargetPercentY}};
  }
  return j;
}

inline std::string to_text(const std::vector<AccuracyReport>& runs) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-9s %10s %10s %8s %8s %9s %8s\n", "sigma_db", "model", "mae_x_m",
                "mae_y_m", "err_x_%", "err_y_%", "accuracy", "failures");
  out += line;
  for (const auto& r : runs) {
    for (const auto& m : r.models) {
      std::snprintf(line, sizeof line, "%-8.2f %-9s %10.4f %10.4f %8.2f %8.2f %9.2f %8lld\n", r.sigma,
                    m.name.c_str(), m.mean_abs_error_x, m.mean_abs_error_y, m.percent_error_x,
                    m.percent_error_y, m.accuracy_percent, static_cast<long long>(m.failures));
      out += line;
    }
    if (r.models.size() >= 2) {
      std::snprintf(line, sizeof line, "%-8.2f delta(%s - %s) accuracy %+.2f pp\n", r.sigma,
                    r.models[0].name.c_str(), r.models[1].name.c_str(),
                    r.models[0].accuracy_percent - r.models[1].accuracy_percent);
      out += line;
    }
  }
  if (!runs.empty()) {
    std::snprintf(line, sizeof line, "trials %d per sigma, seed %llu, extent %.2f x %.2f m\n", runs.front().trials,
                  static_cast<unsigned long long>(runs.front().seed), runs.front().extent_x,
                  runs.front().extent_y);
    out += line;
  }
  return out;
}

}  // namespace amie::sim
