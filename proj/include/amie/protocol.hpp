#pragma once

// Wire frames between clients and the control unit, and the bilingual
// message catalogue.
//
// Frames are single-line JSON objects terminated by '\n'. Requests:
//   {"v":1,"type":"locate","lang":"en","rssi":{"1":-55,"2":-60,...}}
// Responses:
//   {"v":1,"status":"ok","type":"locate","message":"...","data":{...}}
//   {"v":1,"status":"error","type":"locate","message":"...","error":"insufficient_signal","detail":"..."}

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "amie/error.hpp"
#include "amie/floorplan.hpp"
#include "amie/geometry.hpp"
#include "amie/positioning.hpp"
#include "amie/rfmodel.hpp"

namespace amie::proto {

inline constexpr int kProtocolVersion = 1;

enum class Kind { Locate, Navigate, Emergency, Temperature, Occupancy, Weather, SimMove, SimState };

inline constexpr std::array<Kind, 8> kAllKinds{Kind::Locate,    Kind::Navigate,  Kind::Emergency,
                                               Kind::Temperature, Kind::Occupancy, Kind::Weather,
                                               Kind::SimMove,   Kind::SimState};

constexpr std::string_view to_string(Kind k) noexcept {
  switch (k) {
    case Kind::Locate: return "locate";
    case Kind::Navigate: return "navigate";
    case Kind::Emergency: return "emergency";
    case Kind::Temperature: return "temperature";
    case Kind::Occupancy: return "occupancy";
    case Kind::Weather: return "weather";
    case Kind::SimMove: return "sim.move";
    case Kind::SimState: return "sim.state";
  }
  return "locate";
}

inline std::optional<Kind> kind_from_string(std::string_view s) {
  for (Kind k : kAllKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

enum class Lang { En, Ar };

constexpr std::string_view to_string(Lang l) noexcept { return l == Lang::En ? "en" : "ar"; }

struct Request {
  Kind kind = Kind::Locate;
  std::optional<Lang> lang;  // unset: session default
  std::optional<pos::RssiVector> rssi;
  std::optional<std::string> dest;
  std::optional<std::string> room;
  std::optional<Point> move;
};

struct Response {
  bool ok = true;
  std::optional<Kind> kind;  // unset when the request kind could not be determined
  std::string message;
  nlohmann::json data;       // object on ok
  std::string error_code;    // wire code on error
  std::string detail;
};

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

namespace detail {

inline pos::RssiVector decode_rssi(const nlohmann::json& j, const pos::NodeLayout* layout) {
  if (!j.is_object()) throw Error(ErrorCode::bad_frame, "rssi must be an object of node id to dBm");
  pos::RssiVector v;
  for (const auto& [key, value] : j.items()) {
    int id = 0;
    std::size_t used = 0;
    try {
      id = std::stoi(key, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != key.size() || id <= 0)
      throw Error(ErrorCode::bad_frame, "rssi key '" + key + "' is not a node id");
    if (!value.is_number() || !rf::in_range(value.get<double>()))
      throw Error(ErrorCode::bad_frame, "rssi for node " + key + " must be a number in [-120, 0] dBm");
    if (layout != nullptr && layout->find(id) == nullptr)
      throw Error(ErrorCode::bad_frame, "rssi names unknown node " + key);
    v[id] = value.get<double>();
  }
  return v;
}

inline std::string string_field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw Error::missing_field(name);
  if (!j.at(name).is_string() || j.at(name).get<std::string>().empty())
    throw Error(ErrorCode::bad_frame, std::string(name) + " must be a non-empty string");
  return j.at(name).get<std::string>();
}

}  // namespace detail

/// Parses and validates one frame. With a layout, RSSI entries for unknown
/// beacons are rejected.
inline Request decode_frame(std::string_view line, const pos::NodeLayout* layout = nullptr) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::bad_frame, "frame is not valid JSON");
  }
  if (!j.is_object()) throw Error(ErrorCode::bad_frame, "frame must be a JSON object");
  if (!j.contains("v")) throw Error::missing_field("v");
  if (!j.at("v").is_number_integer() || j.at("v").get<int>() != kProtocolVersion)
    throw Error(ErrorCode::bad_frame, "unsupported protocol version");
  if (!j.contains("type")) throw Error::missing_field("type");
  if (!j.at("type").is_string()) throw Error(ErrorCode::bad_frame, "type must be a string");
  const auto kind = kind_from_string(j.at("type").get<std::string>());
  if (!kind) throw Error(ErrorCode::unknown_kind, "unknown request type '" + j.at("type").get<std::string>() + "'");

  Request r;
  r.kind = *kind;
  if (j.contains("lang")) {
    const auto& l = j.at("lang");
    if (l == "en")
      r.lang = Lang::En;
    else if (l == "ar")
      r.lang = Lang::Ar;
    else
      throw Error(ErrorCode::bad_frame, "lang must be \"en\" or \"ar\"");
  }
  if (j.contains("rssi")) r.rssi = detail::decode_rssi(j.at("rssi"), layout);

  switch (r.kind) {
    case Kind::Navigate:
      r.dest = detail::string_field(j, "dest");
      [[fallthrough]];
    case Kind::Locate:
    case Kind::Emergency:
      if (!r.rssi) throw Error::missing_field("rssi");
      break;
    case Kind::Temperature:
    case Kind::Occupancy:
      r.room = detail::string_field(j, "room");
      break;
    case Kind::SimMove: {
      if (!j.contains("move")) throw Error::missing_field("move");
      const auto& m = j.at("move");
      if (!m.is_object() || !m.contains("dx") || !m.contains("dy") || !m.at("dx").is_number() ||
          !m.at("dy").is_number() || !std::isfinite(m.at("dx").get<double>()) ||
          !std::isfinite(m.at("dy").get<double>()))
        throw Error(ErrorCode::bad_frame, "move must be {\"dx\": number, \"dy\": number}");
      r.move = Point{m.at("dx").get<double>(), m.at("dy").get<double>()};
      break;
    }
    case Kind::Weather:
    case Kind::SimState:
      break;
  }
  return r;
}

inline nlohmann::json encode_request(const Request& r) {
  nlohmann::json j{{"v", kProtocolVersion}, {"type", to_string(r.kind)}};
  if (r.lang) j["lang"] = to_string(*r.lang);
  if (r.rssi) {
    j["rssi"] = nlohmann::json::object();
    for (const auto& [id, v] : *r.rssi) j["rssi"][std::to_string(id)] = v;
  }
  if (r.dest) j["dest"] = *r.dest;
  if (r.room) j["room"] = *r.room;
  if (r.move) j["move"] = {{"dx", r.move->x}, {"dy", r.move->y}};
  return j;
}

inline std::string encode_response(const Response& r) {
  nlohmann::ordered_json j;
  j["v"] = kProtocolVersion;
  j["status"] = r.ok ? "ok" : "error";
  j["type"] = r.kind ? nlohmann::ordered_json(to_string(*r.kind)) : nlohmann::ordered_json(nullptr);
  j["message"] = r.message;
  if (r.ok) {
    j["data"] = r.data.is_null() ? nlohmann::json::object() : r.data;
  } else {
    j["error"] = r.error_code;
    j["detail"] = r.detail;
  }
  return j.dump();
}

// ---------------------------------------------------------------------------
// Message catalogue
// ---------------------------------------------------------------------------

enum class Message {
  Forward,
  TurnLeft,
  TurnRight,
  TurnAround,
  Arrived,
  Location,
  Temperature,
  TemperatureUnavailable,
  Occupied,
  Vacant,
  Weather,
  Emergency,
  SimMoved,
  SimState,
  Failure,
};

inline constexpr std::array<Message, 15> kAllMessages{
    Message::Forward,  Message::TurnLeft,  Message::TurnRight,   Message::TurnAround,
    Message::Arrived,  Message::Location,  Message::Temperature, Message::TemperatureUnavailable,
    Message::Occupied, Message::Vacant,    Message::Weather,     Message::Emergency,
    Message::SimMoved, Message::SimState,  Message::Failure};

inline constexpr Message message_for(plan::Direction d) {
  switch (d) {
    case plan::Direction::Forward: return Message::Forward;
    case plan::Direction::TurnLeft: return Message::TurnLeft;
    case plan::Direction::TurnRight: return Message::TurnRight;
    case plan::Direction::TurnAround: return Message::TurnAround;
    case plan::Direction::Arrived: return Message::Arrived;
  }
  return Message::Arrived;
}

/// Catalogue template for (message, lang); `{0}` and `{1}` are arguments.
/// Returns an empty view for a missing entry.
constexpr std::string_view catalogue_entry(Message m, Lang lang) noexcept {
  const bool en = lang == Lang::En;
  switch (m) {
    case Message::Forward: return en ? "Move Forward" : "تحرك الى الامام";
    case Message::TurnLeft: return en ? "Turn Left" : "تحرك الى اليسار";
    case Message::TurnRight: return en ? "Turn Right" : "تحرك الى اليمين";
    case Message::TurnAround: return en ? "Turn Around" : "استدر للخلف";
    case Message::Arrived: return en ? "You have reached your destination" : "لقد وصلت الى المكان المطلوب";
    case Message::Location: return en ? "You are near the {0}" : "أنت بالقرب من {0}";
    case Message::Temperature: return en ? "The temperature in the {0} is {1} degrees" : "درجة الحرارة في {0} هي {1} درجة";
    case Message::TemperatureUnavailable:
      return en ? "The temperature in the {0} is not available" : "درجة الحرارة في {0} غير متوفرة";
    case Message::Occupied: return en ? "There are people in the {0}" : "يوجد أشخاص في {0}";
    case Message::Vacant: return en ? "Nobody is in the {0}" : "لا يوجد أحد في {0}";
    case Message::Weather: return en ? "Outside it is {0}, {1} degrees" : "الطقس في الخارج {0}، {1} درجة";
    case Message::Emergency:
      return en ? "Emergency! Follow the directions to the exit." : "حالة طوارئ! اتبع التعليمات الى المخرج.";
    case Message::SimMoved: return en ? "Position updated" : "تم تحديث الموقع";
    case Message::SimState: return en ? "Simulation state" : "حالة المحاكاة";
    case Message::Failure: return en ? "Sorry, the request could not be completed" : "عذرا، تعذر تنفيذ الطلب";
  }
  return {};
}

inline std::string render_message(Message m, Lang lang, const std::vector<std::string>& args = {}) {
  const std::string_view tmpl = catalogue_entry(m, lang);
  if (tmpl.empty()) throw Error(ErrorCode::internal_error, "message catalogue has no entry");
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}' && tmpl[i + 1] >= '0' && tmpl[i + 1] <= '9') {
      const auto idx = static_cast<std::size_t>(tmpl[i + 1] - '0');
      if (idx < args.size()) out += args[idx];
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

inline std::string render_message(plan::Direction d, Lang lang) { return render_message(message_for(d), lang); }

// Known weather condition tokens in Arabic; anything else passes through.
inline std::string condition_text(const std::string& token, Lang lang) {
  if (lang == Lang::En) return token;
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 6> table{{
      {"sunny", "مشمس"},
      {"cloudy", "غائم"},
      {"rainy", "ممطر"},
      {"windy", "عاصف"},
      {"dusty", "مغبر"},
      {"clear", "صاف"},
  }};
  for (const auto& [en, ar] : table)
    if (token == en) return std::string(ar);
  return token;
}

// "42" for whole numbers, "23.5" otherwise.
inline std::string format_number(double v) {
  char buf[32];
  const double r = std::round(v * 10.0) / 10.0;
  if (r == std::floor(r))
    std::snprintf(buf, sizeof buf, "%.0f", r + 0.0);
  else
    std::snprintf(buf, sizeof buf, "%.1f", r);
  return buf;
}

// Rounds for the wire so golden frames are stable across platforms.
inline double wire_round(double v, double scale = 1e4) {
  return std::round(v * scale) / scale + 0.0;
}

}  // namespace amie::proto
