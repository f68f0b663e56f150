#pragma once

// Service configuration file (also referenced by AMIE_CONFIG).
//
// {
//   "floorplan": "auk-b-corridor.json",          // relative to this file
//   "radio": {"rssi0": -59, "d0": 1, "n": 2},
//   "mode": "sim",                                // live | sim
//   "ports": {"tcp": 7007, "ws": 7008},
//   "weather": "stub",                            // or http://host:port/path
//   "lang": "en",
//   "sim": {"noise_sigma": 0, "seed": 1, "step_length": 2, "start": [1, 1]}
// }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "amie/error.hpp"
#include "amie/floorplan.hpp"
#include "amie/rfmodel.hpp"
#include "amie/service.hpp"
#include "amie/simkit.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace amie {

struct AppConfig {
  std::filesystem::path floorplan;
  rf::LogDistanceModel radio = rf::kDefaultRadio;
  svc::Mode mode = svc::Mode::Live;
  std::uint16_t tcp_port = 7007;
  std::uint16_t ws_port = 7008;
  std::string weather = "stub";
  proto::Lang lang = proto::Lang::En;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  double step_length = sim::kDefaultStepLength;
  Point start{1.0, 1.0};
};

namespace detail {

inline std::uint16_t port_of(const nlohmann::json& j, const char* name, std::uint16_t fallback) {
  if (!j.contains(name)) return fallback;
  const auto& v = j.at(name);
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 65535)
    throw Error(ErrorCode::config_error, std::string("ports.") + name + " must be an integer in [0, 65535]");
  return static_cast<std::uint16_t>(v.get<long long>());
}

}  // namespace detail

inline AppConfig parse_app_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::config_error, "config must be a JSON object");
  AppConfig c;
  try {
    if (!j.contains("floorplan") || !j.at("floorplan").is_string())
      throw Error(ErrorCode::config_error, "floorplan path is required");
    c.floorplan = j.at("floorplan").get<std::string>();
    if (c.floorplan.is_relative()) c.floorplan = base_dir / c.floorplan;
    if (!std::filesystem::exists(c.floorplan))
      throw Error(ErrorCode::config_error, "floorplan " + c.floorplan.string() + " does not exist");

    if (j.contains("radio")) {
      const auto& r = j.at("radio");
      c.radio.rssi0 = r.value("rssi0", c.radio.rssi0);
      c.radio.d0 = r.value("d0", c.radio.d0);
      c.radio.n = r.value("n", c.radio.n);
      rf::validate(c.radio);
    }
    const std::string mode = j.value("mode", std::string("live"));
    if (mode == "live")
      c.mode = svc::Mode::Live;
    else if (mode == "sim")
      c.mode = svc::Mode::Sim;
    else
      throw Error(ErrorCode::config_error, "mode must be live or sim");

    if (j.contains("ports")) {
      c.tcp_port = detail::port_of(j.at("ports"), "tcp", c.tcp_port);
      c.ws_port = detail::port_of(j.at("ports"), "ws", c.ws_port);
    }
    c.weather = j.value("weather", c.weather);
    const std::string lang = j.value("lang", std::string("en"));
    if (lang != "en" && lang != "ar") throw Error(ErrorCode::config_error, "lang must be en or ar");
    c.lang = lang == "en" ? proto::Lang::En : proto::Lang::Ar;

    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      c.noise_sigma = s.value("noise_sigma", c.noise_sigma);
      c.seed = s.value("seed", c.seed);
      c.step_length = s.value("step_length", c.step_length);
      if (s.contains("start")) c.start = {s.at("start").at(0).get<double>(), s.at("start").at(1).get<double>()};
      if (!(c.noise_sigma >= 0.0) || !(c.step_length > 0.0))
        throw Error(ErrorCode::config_error, "sim.noise_sigma must be >= 0 and sim.step_length > 0");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config_error, std::string("config has a wrongly typed field: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    throw Error(ErrorCode::config_error, e.what());
  }
  return c;
}

inline AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_app_config(j, path.parent_path());
}

/// GETs a JSON weather payload from an http:// URL.
inline svc::WeatherProvider http_weather_provider(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (url.rfind("http://", 0) != 0)
    throw Error(ErrorCode::config_error, "weather provider must be 'stub' or an http:// URL");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string host = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return [host, path] {
    httplib::Client client(host);
    client.set_connection_timeout(3);
    client.set_read_timeout(3);
    auto res = client.Get(path);
    if (!res || res->status != 200) throw std::runtime_error("weather request failed");
    return nlohmann::json::parse(res->body);
  };
}

inline svc::ServiceContext make_service_context(const AppConfig& c) {
  svc::ServiceContext ctx;
  ctx.plan = std::make_shared<const plan::FloorPlan>(plan::load_floorplan_file(c.floorplan.string()));
  ctx.localization_model = c.radio;
  ctx.mode = c.mode;
  ctx.sensors = sim::make_reference_bus();
  ctx.weather = c.weather == "stub" ? svc::stub_weather_provider() : http_weather_provider(c.weather);
  ctx.default_lang = c.lang;
  if (c.mode == svc::Mode::Sim) {
    sim::SimConfig sc;
    sc.plan = *ctx.plan;
    sc.radio = c.radio;
    sc.noise_sigma = c.noise_sigma;
    sc.seed = c.seed;
    sc.step_length = c.step_length;
    ctx.simulator = std::make_shared<sim::Simulator>(sc, ctx.sensors, c.start);
  }
  return ctx;
}

}  // namespace amie
