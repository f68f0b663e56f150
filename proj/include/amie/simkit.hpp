#pragma once

// Deterministic radio, motion and sensor-node simulation plus the Monte
// Carlo localization accuracy harness.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "amie/error.hpp"
#include "amie/floorplan.hpp"
#include "amie/positioning.hpp"
#include "amie/random.hpp"
#include "amie/rfmodel.hpp"

namespace amie::sim {

// ---------------------------------------------------------------------------
// Sensor bus
// ---------------------------------------------------------------------------

inline constexpr int kMotionNodesPerRoom = 4;
inline constexpr double kOccupancyWindow = 30.0;  // s, inclusive
inline constexpr double kDefaultPollTimeout = 2.0;  // s
inline constexpr double kNodeResponseTime = 0.01;   // s

struct SensorNode {
  int id = 0;
  std::optional<double> last_trigger;  // bus time of the last motion event
  bool responsive = true;
};

/// One room: a temperature sensor carried by node 1 plus four motion nodes.
struct RoomSensors {
  std::string key;
  double temperature_c = 0.0;
  std::array<SensorNode, kMotionNodesPerRoom> nodes{{{1, {}, true}, {2, {}, true}, {3, {}, true}, {4, {}, true}}};
};

struct MotionReading {
  int node = 0;
  bool triggered = false;
  bool stale = false;
};

struct SensorReadings {
  std::string room;
  std::optional<double> temperature_c;  // empty when never read successfully
  bool temperature_stale = false;
  std::array<MotionReading, kMotionNodesPerRoom> motion{};
  double completed_at = 0.0;
};

/// Channel events in the order they happened on the shared radio channel.
struct PollEvent {
  enum class Kind { Begin, End };
  Kind kind = Kind::Begin;
  std::string room;
  int node = 0;
  double time = 0.0;
  bool stale = false;
};

/// All nodes share one channel: polls run one at a time, and a node that
/// does not answer costs the full poll timeout before the next node is
/// addressed.
class SensorBus {
public:
  explicit SensorBus(std::vector<RoomSensors> rooms = {}, double poll_timeout = kDefaultPollTimeout)
      : poll_timeout_(poll_timeout) {
    for (auto& r : rooms) rooms_.emplace(r.key, std::move(r));
  }

  SensorBus(const SensorBus&) = delete;
  SensorBus& operator=(const SensorBus&) = delete;

  double poll_timeout() const noexcept { return poll_timeout_; }

  double now() const {
    std::lock_guard lock(mutex_);
    return clock_;
  }
  void set_now(double t) {
    std::lock_guard lock(mutex_);
    clock_ = std::max(clock_, t);
  }

  bool has_room(const std::string& key) const {
    std::lock_guard lock(mutex_);
    return rooms_.count(key) != 0;
  }
  std::vector<std::string> room_keys() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [k, _] : rooms_) out.push_back(k);
    return out;
  }

  void trigger_motion(const std::string& room, int node, double t) {
    std::lock_guard lock(mutex_);
    node_ref(room, node).last_trigger = t;
  }
  void set_responsive(const std::string& room, int node, bool responsive) {
    std::lock_guard lock(mutex_);
    node_ref(room, node).responsive = responsive;
  }
  void set_temperature(const std::string& room, double celsius) {
    std::lock_guard lock(mutex_);
    room_ref(room).temperature_c = celsius;
  }

  SensorReadings poll(const std::string& room) {
    std::lock_guard lock(mutex_);
    if (outstanding_.fetch_add(1) != 0) overlap_detected_ = true;
    const RoomSensors& r = room_ref(room);

    SensorReadings out;
    out.room = room;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const SensorNode& node = r.nodes[i];
      const std::string cache_key = room + "#" + std::to_string(node.id);
      trace_.push_back({PollEvent::Kind::Begin, room, node.id, clock_, false});
      if (node.responsive) {
        clock_ += kNodeResponseTime;
        const bool triggered = node.last_trigger && clock_ - *node.last_trigger <= kOccupancyWindow;
        out.motion[i] = {node.id, triggered, false};
        motion_cache_[cache_key] = triggered;
        if (i == 0) {
          out.temperature_c = r.temperature_c;
          temperature_cache_[room] = r.temperature_c;
        }
      } else {
        clock_ += poll_timeout_;
        const auto cached = motion_cache_.find(cache_key);
        out.motion[i] = {node.id, cached != motion_cache_.end() && cached->second, true};
        if (i == 0) {
          out.temperature_stale = true;
          if (auto t = temperature_cache_.find(room); t != temperature_cache_.end())
            out.temperature_c = t->second;
        }
      }
      trace_.push_back({PollEvent::Kind::End, room, node.id, clock_, !node.responsive});
    }
    out.completed_at = clock_;
    outstanding_.fetch_sub(1);
    return out;
  }

  bool occupancy(const std::string& room, double now) const {
    std::lock_guard lock(mutex_);
    for (const auto& n : room_ref(room).nodes)
      if (n.last_trigger && now - *n.last_trigger <= kOccupancyWindow && now >= *n.last_trigger)
        return true;
    return false;
  }

  std::vector<PollEvent> trace() const {
    std::lock_guard lock(mutex_);
    return trace_;
  }
  bool overlap_detected() const noexcept { return overlap_detected_.load(); }

private:
  RoomSensors& room_ref(const std::string& key) {
    auto it = rooms_.find(key);
    if (it == rooms_.end()) throw Error(ErrorCode::unknown_room, "no sensors for room '" + key + "'");
    return it->second;
  }
  const RoomSensors& room_ref(const std::string& key) const {
    auto it = rooms_.find(key);
    if (it == rooms_.end()) throw Error(ErrorCode::unknown_room, "no sensors for room '" + key + "'");
    return it->second;
  }
  SensorNode& node_ref(const std::string& room, int node) {
    for (auto& n : room_ref(room).nodes)
      if (n.id == node) return n;
    throw Error(ErrorCode::lookup_error, "room '" + room + "' has no node " + std::to_string(node));
  }

  mutable std::mutex mutex_;
  std::map<std::string, RoomSensors> rooms_;
  std::map<std::string, bool> motion_cache_;
  std::map<std::string, double> temperature_cache_;
  std::vector<PollEvent> trace_;
  double poll_timeout_;
  double clock_ = 0.0;
  std::atomic<int> outstanding_{0};
  std::atomic<bool> overlap_detected_{false};
};

inline SensorReadings poll_sensor_bus(SensorBus& bus, const std::string& room) { return bus.poll(room); }

inline bool room_occupancy(const SensorBus& bus, const std::string& room, double now) {
  return bus.occupancy(room, now);
}

/// Sensor fixture for the reference corridor: the digital lab at 23.5 C
/// with motion 3 s and 40 s before t = 100 s, and an empty classroom.
inline std::vector<RoomSensors> reference_rooms() {
  RoomSensors lab;
  lab.key = "digital_lab";
  lab.temperature_c = 23.5;
  lab.nodes[0].last_trigger = 97.0;
  lab.nodes[3].last_trigger = 60.0;
  RoomSensors classroom;
  classroom.key = "classroom";
  classroom.temperature_c = 22.0;
  return {lab, classroom};
}
inline constexpr double kReferenceBusTime = 100.0;

inline std::shared_ptr<SensorBus> make_reference_bus() {
  auto bus = std::make_shared<SensorBus>(reference_rooms());
  bus->set_now(kReferenceBusTime);
  return bus;
}

// ---------------------------------------------------------------------------
// Radio and user motion
// ---------------------------------------------------------------------------

inline constexpr double kDefaultStepLength = 2.0;
inline constexpr double kSecondsPerTick = 1.0;

struct SimConfig {
  plan::FloorPlan plan;
  rf::LogDistanceModel radio = rf::kDefaultRadio;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double step_length = kDefaultStepLength;
  int trials = 1000;

  void validate() const {
    rf::validate(radio);
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
      throw Error(ErrorCode::validation_error, "noise sigma must be >= 0");
    if (!(step_length > 0.0)) throw Error(ErrorCode::validation_error, "step length must be > 0");
    if (trials < 1) throw Error(ErrorCode::validation_error, "trials must be >= 1");
  }
};

/// Readings for every beacon, including ones below the usable threshold.
inline pos::RssiVector synthesize_rssi_vector(const pos::NodeLayout& layout, Point true_position,
                                              const rf::LogDistanceModel& radio, double sigma, Rng& rng) {
  pos::RssiVector v;
  for (const auto& node : layout.nodes())
    v[node.id] = rf::predict_rssi_log(radio, distance(node.position, true_position), sigma, rng);
  return v;
}

struct SimState {
  std::uint64_t tick = 0;
  plan::UserPose user;
  std::shared_ptr<SensorBus> sensors;
  Rng rng;
};

inline SimState apply_move(SimState state, Point delta, const Rect& bounds) {
  state.user.position = bounds.clamp(state.user.position + delta);
  if (delta.x != 0.0 || delta.y != 0.0) state.user.heading = std::atan2(delta.y, delta.x);
  ++state.tick;
  return state;
}

struct SimSnapshot {
  std::uint64_t tick = 0;
  plan::UserPose user;
  pos::RssiVector rssi;
};

/// Single-writer owner of the simulated world. Every command goes through
/// one mutex, so concurrent clients observe a single serial command order.
class Simulator {
public:
  explicit Simulator(SimConfig config, std::shared_ptr<SensorBus> sensors = nullptr,
                     Point start = {1.0, 1.0})
      : config_(std::move(config)) {
    config_.validate();
    state_.user.position = config_.plan.bounds.clamp(start);
    state_.sensors = sensors ? std::move(sensors) : make_reference_bus();
    state_.rng = Rng(config_.seed);
    time_origin_ = state_.sensors->now();
  }

  const SimConfig& config() const noexcept { return config_; }
  std::shared_ptr<SensorBus> sensors() const { return state_.sensors; }

  SimSnapshot move(Point delta) {
    std::lock_guard lock(mutex_);
    if (!std::isfinite(delta.x) || !std::isfinite(delta.y))
      throw Error(ErrorCode::validation_error, "move delta must be finite");
    state_ = apply_move(std::move(state_), delta, config_.plan.bounds);
    state_.sensors->set_now(now_locked());
    note_presence();
    return snapshot_locked();
  }

  SimSnapshot state() {
    std::lock_guard lock(mutex_);
    return snapshot_locked();
  }

  void place(const plan::UserPose& pose) {
    std::lock_guard lock(mutex_);
    state_.user = pose;
    state_.user.position = config_.plan.bounds.clamp(pose.position);
  }

private:
  // A user close to a room's anchor trips one of its motion sensors.
  double now_locked() const { return time_origin_ + static_cast<double>(state_.tick) * kSecondsPerTick; }

  void note_presence() {
    const double now = now_locked();
    for (const auto& key : state_.sensors->room_keys()) {
      const plan::Poi* poi = config_.plan.find_poi(key);
      if (poi != nullptr && distance(poi->anchor, state_.user.position) <= 2.0)
        state_.sensors->trigger_motion(key, 1 + static_cast<int>(state_.tick % kMotionNodesPerRoom), now);
    }
  }

  SimSnapshot snapshot_locked() {
    SimSnapshot s;
    s.tick = state_.tick;
    s.user = state_.user;
    s.rssi = synthesize_rssi_vector(config_.plan.beacons, state_.user.position, config_.radio,
                                    config_.noise_sigma, state_.rng);
    return s;
  }

  SimConfig config_;
  SimState state_;
  double time_origin_ = 0.0;
  std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Accuracy evaluation
// ---------------------------------------------------------------------------

struct NamedModel {
  std::string name;
  rf::DistanceModel model;
};

struct ModelAccuracy {
  std::string name;
  double mean_abs_error_x = 0.0;  // m
  double mean_abs_error_y = 0.0;  // m
  double percent_error_x = 0.0;
  double percent_error_y = 0.0;
  double accuracy_percent = 0.0;
  std::int64_t failures = 0;
  std::int64_t fallback_trials = 0;
};

struct AccuracyReport {
  std::vector<ModelAccuracy> models;
  int trials = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double extent_x = 0.0;
  double extent_y = 0.0;
};

inline Rect layout_extent(const pos::NodeLayout& layout) {
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  bool first = true;
  for (const auto& n : layout.nodes()) {
    const auto p = n.position;
    if (first) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      first = false;
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  return {max_x - min_x, max_y - min_y};
}

// Calibration walk used for the cubic estimator: every 0.5 m out to 12 m,
// ten readings per mark.
inline std::vector<double> calibration_distances() {
  std::vector<double> d;
  for (int i = 1; i <= 24; ++i) d.push_back(0.5 * i);
  return d;
}
inline constexpr int kCalibrationRepeats = 10;
inline constexpr std::uint64_t kCalibrationStream = 0x9E3779B97F4A7C15ULL;

/// Cubic RSSI->distance fit to a simulated calibration walk taken with the
/// same radio and noise as the evaluation.
inline rf::CubicDistanceModel calibrate_cubic(const SimConfig& config) {
  Rng rng(config.seed ^ kCalibrationStream);
  return rf::fit_cubic_model(rf::synthesize_calibration(config.radio, calibration_distances(),
                                                        kCalibrationRepeats, config.noise_sigma, rng));
}

/// Builds estimators by name: "logdist" (the radio's exact inverse) and
/// "cubic" (calibrated fit).
inline std::vector<NamedModel> make_models(const std::vector<std::string>& names, const SimConfig& config) {
  std::vector<NamedModel> out;
  for (const auto& n : names) {
    if (n == "logdist")
      out.push_back({n, config.radio});
    else if (n == "cubic")
      out.push_back({n, calibrate_cubic(config)});
    else
      throw Error(ErrorCode::validation_error, "unknown model '" + n + "' (expected cubic or logdist)");
  }
  return out;
}

inline AccuracyReport run_accuracy_eval(const SimConfig& config, const std::vector<NamedModel>& models) {
  config.validate();
  const auto& layout = config.plan.beacons;
  const Rect extent = layout_extent(layout);
  if (!(extent.w > 0.0) || !(extent.h > 0.0))
    throw Error(ErrorCode::validation_error, "layout must span both axes");

  struct Acc {
    double sum_x = 0.0, sum_y = 0.0;
    std::int64_t ok = 0, failures = 0, fallbacks = 0;
  };
  std::vector<Acc> acc(models.size());
  Rng rng(config.seed);
  for (int t = 0; t < config.trials; ++t) {
    const Point truth{rng.uniform(0.0, config.plan.bounds.w), rng.uniform(0.0, config.plan.bounds.h)};
    const auto v = synthesize_rssi_vector(layout, truth, config.radio, config.noise_sigma, rng);
    for (std::size_t m = 0; m < models.size(); ++m) {
      try {
        const auto est = pos::trilaterate(layout, v, models[m].model);
        const Point reported = config.plan.bounds.clamp(est.position);
        acc[m].sum_x += std::abs(reported.x - truth.x);
        acc[m].sum_y += std::abs(reported.y - truth.y);
        ++acc[m].ok;
        if (est.fallback_count > 0) ++acc[m].fallbacks;
      } catch (const Error&) {
        ++acc[m].failures;
      }
    }
  }

  AccuracyReport report;
  report.trials = config.trials;
  report.sigma = config.noise_sigma;
  report.seed = config.seed;
  report.extent_x = extent.w;
  report.extent_y = extent.h;
  for (std::size_t m = 0; m < models.size(); ++m) {
    ModelAccuracy r;
    r.name = models[m].name;
    r.failures = acc[m].failures;
    r.fallback_trials = acc[m].fallbacks;
    if (acc[m].ok > 0) {
      r.mean_abs_error_x = acc[m].sum_x / static_cast<double>(acc[m].ok);
      r.mean_abs_error_y = acc[m].sum_y / static_cast<double>(acc[m].ok);
    }
    r.percent_error_x = 100.0 * r.mean_abs_error_x / extent.w;
    r.percent_error_y = 100.0 * r.mean_abs_error_y / extent.h;
    r.accuracy_percent = 100.0 - 0.5 * (r.percent_error_x + r.percent_error_y);
    report.models.push_back(r);
  }
  return report;
}

}  // namespace amie::sim
