#pragma once

// RSSI <-> distance conversion models and cubic calibration fitting.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "amie/error.hpp"
#include "amie/random.hpp"

namespace amie::rf {

inline constexpr double kMinRssiDbm = -120.0;
inline constexpr double kMaxRssiDbm = 0.0;
// Readings weaker than this carry no usable distance information.
inline constexpr double kUsableRssiDbm = -90.0;
// Forward-model distance floor (avoids log10(0)).
inline constexpr double kMinForwardDistance = 0.1;

inline bool is_usable(double rssi_dbm) { return rssi_dbm >= kUsableRssiDbm; }
inline bool in_range(double rssi_dbm) {
  return std::isfinite(rssi_dbm) && rssi_dbm >= kMinRssiDbm && rssi_dbm <= kMaxRssiDbm;
}

/// distance = a3*x^3 + a2*x^2 + a1*x + a0, x in dBm.
struct CubicDistanceModel {
  double a3 = 0.0;
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;
};

/// Coefficients exactly as printed for the original hardware. Over the
/// usable RSSI range they evaluate to negative distances, so they are kept
/// for reference only and never used as a default.
inline constexpr CubicDistanceModel kPrintedCubicModel{-31e-5, -73e-2, 0.0, -1.5e2};

struct LogDistanceModel {
  double rssi0 = -59.0;  // dBm at d0
  double d0 = 1.0;       // m
  double n = 2.0;        // path-loss exponent
};

inline constexpr LogDistanceModel kDefaultRadio{-59.0, 1.0, 2.0};

using DistanceModel = std::variant<CubicDistanceModel, LogDistanceModel>;

struct CalibrationSample {
  double rssi = 0.0;      // dBm
  double distance = 0.0;  // m
};

inline double eval_cubic_distance(const CubicDistanceModel& m, double rssi) {
  return ((m.a3 * rssi + m.a2) * rssi + m.a1) * rssi + m.a0;
}

inline double eval_log_distance(const LogDistanceModel& m, double rssi) {
  return m.d0 * std::pow(10.0, (m.rssi0 - rssi) / (10.0 * m.n));
}

inline double to_distance(const DistanceModel& model, double rssi) {
  return std::visit(
      [rssi](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CubicDistanceModel>)
          return eval_cubic_distance(m, rssi);
        else
          return eval_log_distance(m, rssi);
      },
      model);
}

inline void validate(const LogDistanceModel& m) {
  if (!(m.n > 0.0) || !(m.d0 > 0.0) || !std::isfinite(m.rssi0) || !std::isfinite(m.n) ||
      !std::isfinite(m.d0))
    throw Error(ErrorCode::validation_error, "log-distance model requires finite rssi0, n > 0, d0 > 0");
}

/// Noise-free inverse of eval_log_distance plus additive Gaussian noise (dB).
inline double predict_rssi_log(const LogDistanceModel& m, double distance, double noise_sigma, Rng& rng) {
  const double d = std::max(distance, kMinForwardDistance);
  double rssi = m.rssi0 - 10.0 * m.n * std::log10(d / m.d0);
  if (noise_sigma > 0.0) rssi += rng.normal(0.0, noise_sigma);
  return rssi;
}

/// Degree-3 least-squares fit of distance as a function of RSSI.
///
/// The abscissae are centred and scaled before solving so the Vandermonde
/// system stays well conditioned, then the coefficients are expanded back
/// into powers of the raw RSSI.
inline CubicDistanceModel fit_cubic_model(const std::vector<CalibrationSample>& samples) {
  std::set<double> distinct;
  for (const auto& s : samples) {
    if (!std::isfinite(s.rssi) || !std::isfinite(s.distance) || s.distance < 0.0)
      throw Error(ErrorCode::fit_error, "calibration sample must have finite rssi and distance >= 0");
    distinct.insert(s.rssi);
  }
  if (samples.size() < 4 || distinct.size() < 4)
    throw Error(ErrorCode::fit_error,
                "cubic fit needs at least 4 distinct rssi values, got " + std::to_string(distinct.size()));

  const auto [lo, hi] = std::minmax_element(distinct.begin(), distinct.end());
  const double center = 0.5 * (*lo + *hi);
  const double scale = 0.5 * (*hi - *lo);

  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(rows, 4);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double t = (samples[static_cast<std::size_t>(i)].rssi - center) / scale;
    a(i, 0) = 1.0;
    a(i, 1) = t;
    a(i, 2) = t * t;
    a(i, 3) = t * t * t;
    b(i) = samples[static_cast<std::size_t>(i)].distance;
  }
  const Eigen::Vector4d c = a.colPivHouseholderQr().solve(b);

  // p(t) with t = (x - m)/s  ->  q(x) = sum c_k (x - m)^k / s^k
  const double m = center;
  const double s2 = scale * scale;
  const double s3 = s2 * scale;
  const double b0 = c(0), b1 = c(1) / scale, b2 = c(2) / s2, b3 = c(3) / s3;
  CubicDistanceModel out;
  out.a3 = b3;
  out.a2 = b2 - 3.0 * b3 * m;
  out.a1 = b1 - 2.0 * b2 * m + 3.0 * b3 * m * m;
  out.a0 = b0 - b1 * m + b2 * m * m - b3 * m * m * m;
  return out;
}

/// Reads `rssi_dbm,distance_m` CSV (header required).
inline std::vector<CalibrationSample> read_calibration_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse_error, "calibration file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != "rssi_dbm,distance_m")
    throw Error(ErrorCode::parse_error, "calibration header must be 'rssi_dbm,distance_m'");

  std::vector<CalibrationSample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": expected two columns");
    try {
      std::size_t used = 0;
      const std::string rs = line.substr(0, comma), ds = line.substr(comma + 1);
      CalibrationSample s;
      s.rssi = std::stod(rs, &used);
      if (used != rs.size()) throw std::invalid_argument("trailing");
      s.distance = std::stod(ds, &used);
      if (used != ds.size()) throw std::invalid_argument("trailing");
      if (!std::isfinite(s.distance) || s.distance < 0.0)
        throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": distance must be >= 0");
      out.push_back(s);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": not a number");
    }
  }
  return out;
}

inline std::vector<CalibrationSample> read_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open calibration file " + path);
  return read_calibration_csv(in);
}

/// Synthetic calibration walk: `repeats` noisy readings at each distance.
inline std::vector<CalibrationSample> synthesize_calibration(const LogDistanceModel& radio,
                                                             const std::vector<double>& distances,
                                                             int repeats, double noise_sigma, Rng& rng) {
  std::vector<CalibrationSample> out;
  out.reserve(distances.size() * static_cast<std::size_t>(std::max(repeats, 0)));
  for (double d : distances)
    for (int r = 0; r < repeats; ++r) out.push_back({predict_rssi_log(radio, d, noise_sigma, rng), d});
  return out;
}

}  // namespace amie::rf
