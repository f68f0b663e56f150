#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "amie/scenarios.hpp"

namespace {

using namespace amie;
using nlohmann::json;

pos::RssiVector clean_rssi(const svc::ServiceContext& ctx, Point at) {
  Rng rng(0);
  return sim::synthesize_rssi_vector(ctx.plan->beacons, at, rf::kDefaultRadio, 0.0, rng);
}

std::string frame(const std::string& type, const pos::RssiVector& v, const std::string& extra = "") {
  json rssi = json::object();
  for (auto [id, dbm] : v) rssi[std::to_string(id)] = dbm;
  return R"({"v":1,"type":")" + type + R"(","rssi":)" + rssi.dump() + extra + "}";
}

class ServiceTest : public ::testing::Test {
 protected:
  svc::ServiceContext ctx = make_sim_context(reference_floorplan_path());
  svc::SessionContext session;

  json call(const std::string& line) { return json::parse(svc::handle_line(line, ctx, session)); }
};

TEST_F(ServiceTest, LocateNearClassroom) {
  const auto r = call(frame("locate", clean_rssi(ctx, {1, 1})));
  EXPECT_EQ(r["status"], "ok");
  EXPECT_EQ(r["message"], "You are near the Classroom");
  EXPECT_NEAR(r["data"]["x"].get<double>(), 1.0, 1e-4);
  EXPECT_NEAR(r["data"]["y"].get<double>(), 1.0, 1e-4);
  EXPECT_EQ(r["data"]["poi"], "classroom");
}

TEST_F(ServiceTest, LocateInArabic) {
  const auto r = call(frame("locate", clean_rssi(ctx, {1, 7}), R"(,"lang":"ar")"));
  EXPECT_EQ(r["message"], "أنت بالقرب من المختبر الرقمي");
}

TEST_F(ServiceTest, NavigateWalkYieldsCanonicalSequence) {
  const std::vector<Point> walk{{1, 1}, {1, 3}, {1, 5}, {1, 7}, {0.2, 7.5}};
  std::vector<std::string> got;
  for (Point p : walk) {
    const auto r = call(frame("navigate", clean_rssi(ctx, p), R"(,"dest":"digital_lab")"));
    ASSERT_EQ(r["status"], "ok") << r.dump();
    got.push_back(r["message"]);
  }
  const std::vector<std::string> want{"Move Forward", "Move Forward", "Move Forward", "Turn Left",
                                      "You have reached your destination"};
  EXPECT_EQ(got, want);
  EXPECT_FALSE(session.navigation);
}

TEST_F(ServiceTest, NavigateUnknownDestination) {
  const auto r = call(frame("navigate", clean_rssi(ctx, {1, 1}), R"(,"dest":"cafeteria")"));
  EXPECT_EQ(r["status"], "error");
  EXPECT_EQ(r["error"], "unknown_destination");
  EXPECT_EQ(r["type"], "navigate");
}

TEST_F(ServiceTest, InsufficientSignal) {
  const auto r = call(R"({"v":1,"type":"locate","rssi":{"1":-50,"2":-95,"3":-99}})");
  EXPECT_EQ(r["error"], "insufficient_signal");
}

TEST_F(ServiceTest, EmergencyLogsOriginBeforeResponding) {
  std::vector<std::string> events;
  ctx.log = [&](const std::string& s) { events.push_back(s); };
  const auto line = frame("emergency", clean_rssi(ctx, {1, 5}));
  EXPECT_TRUE(events.empty());
  const auto r = call(line);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_NE(events[0].find("x=1.00 y=5.00"), std::string::npos) << events[0];
  EXPECT_EQ(r["status"], "ok");
  EXPECT_EQ(r["data"]["dest"], "exit");
  EXPECT_NEAR(r["data"]["origin"]["y"].get<double>(), 5.0, 1e-4);
  EXPECT_EQ(r["message"].get<std::string>().rfind("Emergency!", 0), 0u);
}

TEST_F(ServiceTest, TemperatureAndOccupancy) {
  auto r = call(R"({"v":1,"type":"temperature","room":"digital_lab"})");
  EXPECT_EQ(r["message"], "The temperature in the Digital Lab is 23.5 degrees");
  EXPECT_EQ(r["data"]["temperature_c"], 23.5);
  EXPECT_EQ(r["data"]["stale"], false);
  EXPECT_EQ(r["data"]["occupied"], true);

  r = call(R"({"v":1,"type":"occupancy","room":"classroom","lang":"ar"})");
  EXPECT_EQ(r["data"]["occupied"], false);
  EXPECT_EQ(r["message"], "لا يوجد أحد في الفصل الدراسي");
  EXPECT_EQ(r["data"]["motion"].size(), 4u);

  r = call(R"({"v":1,"type":"temperature","room":"basement"})");
  EXPECT_EQ(r["error"], "unknown_room");
}

TEST_F(ServiceTest, TemperatureUnavailableWhenSensorSilent) {
  ctx.sensors->set_responsive("classroom", 1, false);
  const auto r = call(R"({"v":1,"type":"temperature","room":"classroom"})");
  EXPECT_EQ(r["status"], "ok");
  EXPECT_TRUE(r["data"]["temperature_c"].is_null());
  EXPECT_EQ(r["message"], "The temperature in the Classroom is not available");
}

TEST_F(ServiceTest, WeatherStub) {
  auto r = call(R"({"v":1,"type":"weather"})");
  EXPECT_EQ(r["message"], "Outside it is sunny, 42 degrees");
  EXPECT_NE(r["message"].get<std::string>().find("42"), std::string::npos);
  r = call(R"({"v":1,"type":"weather","lang":"ar"})");
  EXPECT_EQ(r["message"], "الطقس في الخارج مشمس، 42 درجة");
}

TEST_F(ServiceTest, WeatherStallHitsDeadline) {
  ctx.weather = [] {
    std::this_thread::sleep_for(std::chrono::seconds(5));
    return json{{"condition", "sunny"}, {"temperature_c", 42}};
  };
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = call(R"({"v":1,"type":"weather"})");
  const auto waited = std::chrono::steady_clock::now() - t0;
  EXPECT_EQ(r["error"], "weather_unavailable");
  EXPECT_GE(waited, std::chrono::milliseconds(2900));
  EXPECT_LT(waited, std::chrono::milliseconds(4500));
}

TEST_F(ServiceTest, WeatherMalformedPayload) {
  ctx.weather = [] { return json{{"condition", "sunny"}, {"temperature_c", "hot"}}; };
  EXPECT_EQ(call(R"({"v":1,"type":"weather"})")["error"], "weather_unavailable");
  ctx.weather = []() -> json { throw std::runtime_error("dns"); };
  EXPECT_EQ(call(R"({"v":1,"type":"weather"})")["error"], "weather_unavailable");
  ctx.weather = nullptr;
  EXPECT_EQ(call(R"({"v":1,"type":"weather"})")["error"], "weather_unavailable");
}

TEST_F(ServiceTest, SimCommands) {
  auto r = call(R"({"v":1,"type":"sim.move","move":{"dx":0,"dy":2}})");
  EXPECT_EQ(r["data"]["tick"], 1);
  EXPECT_EQ(r["data"]["pose"]["y"], 3.0);
  EXPECT_EQ(r["data"]["rssi"].size(), 6u);
  r = call(R"({"v":1,"type":"sim.state"})");
  EXPECT_EQ(r["data"]["tick"], 1);
  EXPECT_TRUE(r["data"].contains("plan"));
}

TEST_F(ServiceTest, SimDisabledInLiveMode) {
  ctx.mode = svc::Mode::Live;
  EXPECT_EQ(call(R"({"v":1,"type":"sim.state"})")["error"], "sim_disabled");
  EXPECT_EQ(call(R"({"v":1,"type":"sim.move","move":{"dx":1,"dy":0}})")["error"], "sim_disabled");
}

TEST_F(ServiceTest, OneFrameOutPerFrameIn) {
  for (const char* line : {"garbage", "{", "{}", "null", R"({"v":1,"type":"locate","lang":"ar"})",
                           R"({"v":1,"type":"nope"})", "\xff\xfe"}) {
    const auto out = svc::handle_line(line, ctx, session);
    EXPECT_EQ(out.find('\n'), std::string::npos);
    const auto r = json::parse(out);
    EXPECT_EQ(r["status"], "error") << line;
    EXPECT_EQ(r["v"], 1);
  }
  const auto r = call(R"({"v":1,"type":"locate","lang":"ar"})");
  EXPECT_EQ(r["error"], "missing_field:rssi");
  EXPECT_EQ(r["type"], "locate");
  EXPECT_EQ(r["message"], "عذرا، تعذر تنفيذ الطلب");
}

TEST(FetchWeather, AdvisoryIsEnglish) {
  const auto info = svc::fetch_weather(svc::stub_weather_provider("cloudy", 18.25));
  EXPECT_EQ(info.condition, "cloudy");
  EXPECT_EQ(info.advisory, "Outside it is cloudy, 18.3 degrees");
}

TEST(AppConfigParse, ResolvesAndValidates) {
  const std::filesystem::path base = default_data_dir();
  const auto c = parse_app_config(json::parse(R"({"floorplan":"auk-b-corridor.json","mode":"sim",
      "ports":{"tcp":0,"ws":9001},"lang":"ar","sim":{"noise_sigma":1.5,"start":[2,3]}})"),
                                  base);
  EXPECT_EQ(c.floorplan, base / "auk-b-corridor.json");
  EXPECT_EQ(c.mode, svc::Mode::Sim);
  EXPECT_EQ(c.tcp_port, 0);
  EXPECT_EQ(c.ws_port, 9001);
  EXPECT_EQ(c.lang, proto::Lang::Ar);
  EXPECT_EQ(c.noise_sigma, 1.5);
  EXPECT_EQ(c.start, (Point{2, 3}));

  auto code = [&](const char* text) {
    try {
      parse_app_config(json::parse(text), base);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal_error;
  };
  EXPECT_EQ(code(R"({})"), ErrorCode::config_error);
  EXPECT_EQ(code(R"({"floorplan":"missing.json"})"), ErrorCode::config_error);
  EXPECT_EQ(code(R"({"floorplan":"auk-b-corridor.json","mode":"demo"})"), ErrorCode::config_error);
  EXPECT_EQ(code(R"({"floorplan":"auk-b-corridor.json","ports":{"tcp":70000}})"), ErrorCode::config_error);
  EXPECT_EQ(code(R"({"floorplan":"auk-b-corridor.json","radio":{"n":0}})"), ErrorCode::config_error);
  EXPECT_EQ(code(R"({"floorplan":"auk-b-corridor.json","sim":{"noise_sigma":-1}})"), ErrorCode::config_error);
  EXPECT_EQ(code(R"({"floorplan":"auk-b-corridor.json","lang":"de"})"), ErrorCode::config_error);
}

TEST(AppConfigParse, ShippedServiceConfigLoads) {
  const auto c = load_app_config(default_data_dir() + "/service.json");
  EXPECT_EQ(c.mode, svc::Mode::Sim);
  EXPECT_EQ(c.tcp_port, 7007);
  EXPECT_EQ(c.ws_port, 7008);
}

TEST(Walkthrough, EnglishAndArabic) {
  for (auto lang : {proto::Lang::En, proto::Lang::Ar}) {
    const auto ctx = make_sim_context(reference_floorplan_path());
    const auto steps = run_walkthrough(ctx, "digital_lab", lang);
    std::vector<plan::Direction> dirs;
    for (const auto& s : steps) {
      dirs.push_back(s.direction);
      EXPECT_EQ(s.message, proto::render_message(s.direction, lang));
    }
    using plan::Direction;
    EXPECT_EQ(dirs, (std::vector<Direction>{Direction::Forward, Direction::Forward, Direction::Forward,
                                            Direction::TurnLeft, Direction::Arrived}));
  }
}

TEST(Replay, SkipsBlankLines) {
  const auto ctx = make_sim_context(reference_floorplan_path());
  std::istringstream in("{\"v\":1,\"type\":\"weather\"}\n\n\r\nbad\n");
  const auto out = replay_frames(ctx, in);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(json::parse(out[1])["error"], "bad_frame");
}

}  // namespace
