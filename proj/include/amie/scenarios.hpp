#pragma once

// End-to-end drivers shared by the CLI and the test suites.

#include <istream>
#include <memory>
#include <string>
#include <vector>

#include "amie/config.hpp"
#include "amie/floorplan.hpp"
#include "amie/protocol.hpp"
#include "amie/service.hpp"
#include "amie/simkit.hpp"

namespace amie {

inline std::string default_data_dir() {
#ifdef AMIE_DATA_DIR
  return AMIE_DATA_DIR;
#else
  return "data";
#endif
}

inline std::string reference_floorplan_path() { return default_data_dir() + "/auk-b-corridor.json"; }

/// A sim-mode service over `plan_path` with a noiseless radio.
inline svc::ServiceContext make_sim_context(const std::string& plan_path, double noise_sigma = 0.0,
                                            std::uint64_t seed = 1, Point start = {1.0, 1.0}) {
  AppConfig c;
  c.floorplan = plan_path;
  c.mode = svc::Mode::Sim;
  c.noise_sigma = noise_sigma;
  c.seed = seed;
  c.start = start;
  return make_service_context(c);
}

struct WalkthroughStep {
  plan::Direction direction;
  std::string message;
  Point position;
};

/// Drives the simulated user with the service's own directions: each tick
/// the client reads the beacons, asks for a direction, then walks toward
/// the next waypoint the service reported, at most one step length.
inline std::vector<WalkthroughStep> run_walkthrough(const svc::ServiceContext& ctx, const std::string& dest,
                                                    proto::Lang lang, int max_ticks = 100) {
  if (!ctx.simulator) throw Error(ErrorCode::sim_disabled, "walkthrough needs a sim-mode service");
  svc::SessionContext session;
  std::vector<WalkthroughStep> steps;
  const double step_length = ctx.simulator->config().step_length;
  for (int tick = 0; tick < max_ticks; ++tick) {
    const auto snap = ctx.simulator->state();
    proto::Request req;
    req.kind = proto::Kind::Navigate;
    req.lang = lang;
    req.dest = dest;
    req.rssi = snap.rssi;
    const auto resp = svc::handle_request(req, ctx, session);
    const auto dir_name = resp.data.at("direction").get<std::string>();
    plan::Direction dir = plan::Direction::Arrived;
    for (auto d : plan::kAllDirections)
      if (plan::to_string(d) == dir_name) dir = d;
    steps.push_back({dir, resp.message, snap.user.position});
    if (dir == plan::Direction::Arrived) return steps;

    const auto& route = resp.data.at("route");
    const Point next{route.at(0).at(0).get<double>(), route.at(0).at(1).get<double>()};
    const Point here = snap.user.position;
    const double gap = distance(here, next);
    const double len = std::min(step_length, gap);
    ctx.simulator->move(gap > 0.0 ? (len / gap) * (next - here) : Point{});
  }
  throw Error(ErrorCode::navigation_state, "walkthrough did not arrive within " + std::to_string(max_ticks) + " ticks");
}

/// Feeds recorded request frames through one session, one response each.
inline std::vector<std::string> replay_frames(const svc::ServiceContext& ctx, std::istream& in) {
  svc::SessionContext session;
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(svc::handle_line(line, ctx, session));
  }
  return out;
}

}  // namespace amie
