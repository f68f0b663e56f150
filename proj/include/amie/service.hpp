#pragma once

// Control-unit request handling: localization, navigation, sensor queries
// and weather, rendered through the bilingual catalogue.

#include <chrono>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "amie/error.hpp"
#include "amie/floorplan.hpp"
#include "amie/positioning.hpp"
#include "amie/protocol.hpp"
#include "amie/rfmodel.hpp"
#include "amie/simkit.hpp"

namespace amie::svc {

// ---------------------------------------------------------------------------
// Weather
// ---------------------------------------------------------------------------

struct WeatherInfo {
  std::string condition;
  double temperature_c = 0.0;
  std::string advisory;
};

/// Returns the provider's raw payload: {"condition": str, "temperature_c": num}.
using WeatherProvider = std::function<nlohmann::json()>;

inline constexpr std::chrono::milliseconds kWeatherDeadline{3000};

inline WeatherProvider stub_weather_provider(std::string condition = "sunny", double temperature_c = 42.0) {
  return [condition = std::move(condition), temperature_c] {
    return nlohmann::json{{"condition", condition}, {"temperature_c", temperature_c}};
  };
}

/// Calls the provider on a worker thread and gives up after `deadline`.
/// A late provider keeps running detached; its result is discarded.
inline WeatherInfo fetch_weather(const WeatherProvider& provider,
                                 std::chrono::milliseconds deadline = kWeatherDeadline) {
  if (!provider) throw Error(ErrorCode::weather_unavailable, "no weather provider configured");
  auto promise = std::make_shared<std::promise<nlohmann::json>>();
  auto result = promise->get_future();
  std::thread([provider, promise] {
    try {
      promise->set_value(provider());
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();

  if (result.wait_for(deadline) != std::future_status::ready)
    throw Error(ErrorCode::weather_unavailable, "weather provider missed its deadline");
  nlohmann::json payload;
  try {
    payload = result.get();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::weather_unavailable, std::string("weather provider failed: ") + e.what());
  }
  if (!payload.is_object() || !payload.contains("condition") || !payload.at("condition").is_string() ||
      !payload.contains("temperature_c") || !payload.at("temperature_c").is_number() ||
      !std::isfinite(payload.at("temperature_c").get<double>()))
    throw Error(ErrorCode::weather_unavailable, "weather payload is malformed");

  WeatherInfo info;
  info.condition = payload.at("condition").get<std::string>();
  info.temperature_c = payload.at("temperature_c").get<double>();
  info.advisory = proto::render_message(proto::Message::Weather, proto::Lang::En,
                                        {info.condition, proto::format_number(info.temperature_c)});
  return info;
}

// ---------------------------------------------------------------------------
// Contexts
// ---------------------------------------------------------------------------

enum class Mode { Live, Sim };

/// State shared by every client connection.
struct ServiceContext {
  std::shared_ptr<const plan::FloorPlan> plan;
  rf::DistanceModel localization_model = rf::kDefaultRadio;
  Mode mode = Mode::Live;
  std::shared_ptr<sim::SensorBus> sensors;
  WeatherProvider weather;
  std::chrono::milliseconds weather_deadline = kWeatherDeadline;
  std::shared_ptr<sim::Simulator> simulator;  // set in sim mode
  proto::Lang default_lang = proto::Lang::En;
  std::function<void(const std::string&)> log;  // event sink, may be empty
};

struct ActiveNavigation {
  plan::Navigator navigator;
  plan::UserPose pose;
};

/// Per-connection state; at most one active navigation.
struct SessionContext {
  std::optional<ActiveNavigation> navigation;
  std::optional<Point> last_position;
};

// Moves shorter than this leave the tracked heading unchanged.
inline constexpr double kHeadingMinMove = 0.25;

namespace detail {

inline nlohmann::json point_json(Point p) {
  return {{"x", proto::wire_round(p.x)}, {"y", proto::wire_round(p.y)}};
}

inline nlohmann::json route_json(const plan::Route& r) {
  auto out = nlohmann::json::array();
  for (const auto& w : r) out.push_back({proto::wire_round(w.x), proto::wire_round(w.y)});
  return out;
}

inline nlohmann::json rssi_json(const pos::RssiVector& v) {
  auto out = nlohmann::json::object();
  for (const auto& [id, dbm] : v) out[std::to_string(id)] = proto::wire_round(dbm, 100.0);
  return out;
}

struct Located {
  pos::PositionEstimate estimate;
  Point position;  // estimate clamped into the floor plan
};

inline Located locate(const ServiceContext& ctx, const pos::RssiVector& rssi) {
  auto est = pos::trilaterate(ctx.plan->beacons, rssi, ctx.localization_model);
  return {est, ctx.plan->bounds.clamp(est.position)};
}

/// One navigation tick against a freshly localized position.
inline std::pair<plan::Direction, const ActiveNavigation*> navigate_step(const ServiceContext& ctx,
                                                                         SessionContext& session,
                                                                         const std::string& dest, Point here) {
  auto& nav = session.navigation;
  if (!nav || nav->navigator.destination() != dest) {
    plan::Navigator navigator(*ctx.plan, dest, here);
    plan::UserPose pose{here, 0.0};
    if (session.last_position && distance(*session.last_position, here) >= kHeadingMinMove)
      pose.heading = bearing(*session.last_position, here);
    else if (!navigator.remaining().empty())
      pose.heading = bearing(here, navigator.remaining().front());
    nav.emplace(ActiveNavigation{std::move(navigator), pose});
  } else {
    if (distance(nav->pose.position, here) >= kHeadingMinMove) nav->pose.heading = bearing(nav->pose.position, here);
    nav->pose.position = here;
  }
  session.last_position = here;
  const plan::Direction d = nav->navigator.step(nav->pose);
  return {d, &*nav};
}

inline nlohmann::json navigation_json(const ActiveNavigation& nav, plan::Direction d) {
  return {{"dest", nav.navigator.destination()},
          {"direction", plan::to_string(d)},
          {"arrived", d == plan::Direction::Arrived},
          {"position", point_json(nav.pose.position)},
          {"heading", proto::wire_round(nav.pose.heading, 1e6)},
          {"route", route_json(nav.navigator.remaining())}};
}

inline sim::SensorBus& bus_of(const ServiceContext& ctx) {
  if (!ctx.sensors) throw Error(ErrorCode::unknown_room, "no sensor bus configured");
  return *ctx.sensors;
}

inline std::string room_name(const ServiceContext& ctx, const std::string& room, proto::Lang lang) {
  if (const auto* poi = ctx.plan->find_poi(room)) return lang == proto::Lang::En ? poi->name_en : poi->name_ar;
  return room;
}

inline nlohmann::json snapshot_json(const sim::SimSnapshot& s) {
  return {{"tick", s.tick},
          {"pose", {{"x", proto::wire_round(s.user.position.x)},
                    {"y", proto::wire_round(s.user.position.y)},
                    {"heading", proto::wire_round(s.user.heading, 1e6)}}},
          {"rssi", rssi_json(s.rssi)}};
}

}  // namespace detail

inline proto::Response handle_request(const proto::Request& req, const ServiceContext& ctx,
                                      SessionContext& session) {
  using proto::Kind;
  using proto::Message;
  const proto::Lang lang = req.lang.value_or(ctx.default_lang);
  proto::Response resp;
  resp.kind = req.kind;

  switch (req.kind) {
    case Kind::Locate: {
      const auto loc = detail::locate(ctx, *req.rssi);
      const auto& poi = plan::nearest_poi(loc.position, *ctx.plan);
      session.last_position = loc.position;
      resp.message = proto::render_message(Message::Location, lang,
                                           {lang == proto::Lang::En ? poi.name_en : poi.name_ar});
      resp.data = {{"x", proto::wire_round(loc.position.x)},
                   {"y", proto::wire_round(loc.position.y)},
                   {"poi", poi.key},
                   {"used_nodes", loc.estimate.used_nodes},
                   {"fallback_count", loc.estimate.fallback_count}};
      break;
    }
    case Kind::Navigate: {
      const auto loc = detail::locate(ctx, *req.rssi);
      const auto [dir, nav] = detail::navigate_step(ctx, session, *req.dest, loc.position);
      resp.message = proto::render_message(dir, lang);
      resp.data = detail::navigation_json(*nav, dir);
      if (dir == plan::Direction::Arrived) session.navigation.reset();
      break;
    }
    case Kind::Emergency: {
      const auto loc = detail::locate(ctx, *req.rssi);
      const auto route = plan::emergency_route(*ctx.plan, loc.position);
      if (ctx.log) {
        char line[128];
        std::snprintf(line, sizeof line, "emergency evacuation requested at x=%.2f y=%.2f", route.origin.x,
                      route.origin.y);
        ctx.log(line);
      }
      const auto [dir, nav] = detail::navigate_step(ctx, session, ctx.plan->exit_poi, loc.position);
      resp.message = proto::render_message(Message::Emergency, lang) + " " + proto::render_message(dir, lang);
      resp.data = detail::navigation_json(*nav, dir);
      resp.data["origin"] = detail::point_json(route.origin);
      if (dir == plan::Direction::Arrived) session.navigation.reset();
      break;
    }
    case Kind::Temperature: {
      auto& bus = detail::bus_of(ctx);
      const auto readings = sim::poll_sensor_bus(bus, *req.room);
      const bool occupied = sim::room_occupancy(bus, *req.room, readings.completed_at);
      const auto name = detail::room_name(ctx, *req.room, lang);
      resp.message = readings.temperature_c
                         ? proto::render_message(Message::Temperature, lang,
                                                 {name, proto::format_number(*readings.temperature_c)})
                         : proto::render_message(Message::TemperatureUnavailable, lang, {name});
      resp.data = {{"room", *req.room},
                   {"temperature_c", readings.temperature_c ? nlohmann::json(*readings.temperature_c)
                                                            : nlohmann::json(nullptr)},
                   {"stale", readings.temperature_stale},
                   {"occupied", occupied}};
      break;
    }
    case Kind::Occupancy: {
      auto& bus = detail::bus_of(ctx);
      const auto readings = sim::poll_sensor_bus(bus, *req.room);
      const bool occupied = sim::room_occupancy(bus, *req.room, readings.completed_at);
      const auto name = detail::room_name(ctx, *req.room, lang);
      resp.message = proto::render_message(occupied ? Message::Occupied : Message::Vacant, lang, {name});
      auto motion = nlohmann::json::array();
      for (const auto& m : readings.motion)
        motion.push_back({{"node", m.node}, {"triggered", m.triggered}, {"stale", m.stale}});
      resp.data = {{"room", *req.room}, {"occupied", occupied}, {"motion", motion}};
      break;
    }
    case Kind::Weather: {
      const auto info = fetch_weather(ctx.weather, ctx.weather_deadline);
      resp.message = proto::render_message(
          Message::Weather, lang,
          {proto::condition_text(info.condition, lang), proto::format_number(info.temperature_c)});
      resp.data = {{"condition", info.condition}, {"temperature_c", info.temperature_c}};
      break;
    }
    case Kind::SimMove:
    case Kind::SimState: {
      if (ctx.mode != Mode::Sim || !ctx.simulator)
        throw Error(ErrorCode::sim_disabled, "simulator commands need the service in sim mode");
      const auto snap = req.kind == Kind::SimMove ? ctx.simulator->move(*req.move) : ctx.simulator->state();
      resp.message = proto::render_message(req.kind == Kind::SimMove ? Message::SimMoved : Message::SimState, lang);
      resp.data = detail::snapshot_json(snap);
      if (req.kind == Kind::SimState) resp.data["plan"] = plan::floorplan_to_json(*ctx.plan);
      break;
    }
  }
  return resp;
}

inline proto::Response error_response(const Error& e, std::optional<proto::Kind> kind, proto::Lang lang) {
  proto::Response r;
  r.ok = false;
  r.kind = kind;
  r.message = proto::render_message(proto::Message::Failure, lang);
  r.error_code = e.code_string();
  r.detail = e.what();
  return r;
}

/// One line in, exactly one encoded response out. Never throws for bad
/// input; every failure becomes an error frame.
inline std::string handle_line(std::string_view line, const ServiceContext& ctx, SessionContext& session) {
  std::optional<proto::Kind> kind;
  proto::Lang lang = ctx.default_lang;
  try {
    const auto req = proto::decode_frame(line, &ctx.plan->beacons);
    kind = req.kind;
    lang = req.lang.value_or(ctx.default_lang);
    return proto::encode_response(handle_request(req, ctx, session));
  } catch (const Error& e) {
    if (!kind) {
      // Best effort echo of the type tag for decode failures.
      try {
        const auto j = nlohmann::json::parse(line);
        if (j.is_object() && j.contains("type") && j.at("type").is_string())
          kind = proto::kind_from_string(j.at("type").get<std::string>());
        if (j.is_object() && j.contains("lang") && j.at("lang") == "ar") lang = proto::Lang::Ar;
      } catch (const nlohmann::json::exception&) {
      }
    }
    return proto::encode_response(error_response(e, kind, lang));
  } catch (const std::exception& e) {
    return proto::encode_response(error_response(Error(ErrorCode::internal_error, e.what()), kind, lang));
  }
}

}  // namespace amie::svc
