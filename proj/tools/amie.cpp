// amie: operator entry points for the assisted-living control unit.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/asio/signal_set.hpp>

#include "amie/config.hpp"
#include "amie/floorplan.hpp"
#include "amie/report.hpp"
#include "amie/rfmodel.hpp"
#include "amie/scenarios.hpp"
#include "amie/server.hpp"
#include "amie/simkit.hpp"

namespace {

namespace fs = std::filesystem;
using namespace amie;

int cmd_calibrate(const std::string& path) {
  const auto samples = rf::read_calibration_csv(path);
  const auto m = rf::fit_cubic_model(samples);
  std::printf("samples %zu\n", samples.size());
  std::printf("a3 %.9g\na2 %.9g\na1 %.9g\na0 %.9g\n", m.a3, m.a2, m.a1, m.a0);
  return 0;
}

struct EvaluateArgs {
  std::vector<double> sigmas{2.0};
  int trials = 10000;
  std::uint64_t seed = 42;
  std::vector<std::string> models{"cubic", "logdist"};
  std::string out_dir = "reports";
  std::string plan = reference_floorplan_path();
};

int cmd_evaluate(const EvaluateArgs& a) {
  sim::SimConfig config;
  config.plan = plan::load_floorplan_file(a.plan);
  config.trials = a.trials;
  config.seed = a.seed;

  std::vector<sim::AccuracyReport> runs;
  for (double sigma : a.sigmas) {
    config.noise_sigma = sigma;
    runs.push_back(sim::run_accuracy_eval(config, sim::make_models(a.models, config)));
  }

  nlohmann::json doc = runs.size() == 1 ? sim::to_json(runs.front())
                                        : sim::sweep_to_json(runs, a.models.back());
  const std::string text = sim::to_text(runs);
  fs::create_directories(a.out_dir);
  const fs::path json_path = fs::path(a.out_dir) / "accuracy_report.json";
  const fs::path text_path = fs::path(a.out_dir) / "accuracy_report.txt";
  std::ofstream(json_path, std::ios::binary) << doc.dump(2) << '\n';
  std::ofstream(text_path, std::ios::binary) << text;
  std::cout << text << "wrote " << json_path.string() << " and " << text_path.string() << '\n';
  return 0;
}

std::string resolve_config(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("AMIE_CONFIG"); env != nullptr && *env != '\0') return env;
  return default_data_dir() + "/service.json";
}

int cmd_serve(const std::string& config_path) {
  const auto config = load_app_config(resolve_config(config_path));
  auto ctx = make_service_context(config);
  ctx.log = [](const std::string& line) { std::cerr << line << std::endl; };
  net::Server server(std::move(ctx), config.tcp_port, config.ws_port);
  server.start();
  std::cout << "serving tcp " << server.tcp_port() << " ws " << server.ws_port() << "/ws mode "
            << (config.mode == svc::Mode::Sim ? "sim" : "live") << std::endl;

  boost::asio::io_context signals_io;
  boost::asio::signal_set signals(signals_io, SIGINT, SIGTERM);
  signals.async_wait([](const boost::system::error_code&, int) {});
  signals_io.run();
  server.stop();
  std::cout << "stopped" << std::endl;
  return 0;
}

int cmd_replay(const std::string& trace, const std::string& config_path, const std::string& expect) {
  const auto config = load_app_config(resolve_config(config_path));
  const auto ctx = make_service_context(config);
  std::ifstream in(trace);
  if (!in) throw Error(ErrorCode::config_error, "cannot open trace " + trace);
  const auto responses = replay_frames(ctx, in);
  if (expect.empty()) {
    for (const auto& r : responses) std::cout << r << '\n';
    return 0;
  }
  std::ifstream ein(expect);
  if (!ein) throw Error(ErrorCode::config_error, "cannot open expected responses " + expect);
  std::vector<std::string> expected;
  for (std::string line; std::getline(ein, line);)
    if (!line.empty()) expected.push_back(line);

  int mismatches = 0;
  for (std::size_t i = 0; i < std::max(expected.size(), responses.size()); ++i) {
    const std::string want = i < expected.size() ? expected[i] : "<none>";
    const std::string got = i < responses.size() ? responses[i] : "<none>";
    if (want != got) {
      ++mismatches;
      std::cout << "frame " << i + 1 << " differs\n  expected: " << want << "\n  actual:   " << got << '\n';
    }
  }
  std::cout << responses.size() << " frames replayed, " << mismatches << " mismatches\n";
  if (mismatches != 0) {
    std::cerr << "error: replay_mismatch" << std::endl;
    return 1;
  }
  return 0;
}

int cmd_walkthrough(const std::string& plan_path, const std::string& lang, const std::string& dest) {
  const auto ctx = make_sim_context(plan_path);
  for (const auto& step : run_walkthrough(ctx, dest, lang == "ar" ? proto::Lang::Ar : proto::Lang::En))
    std::cout << step.message << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amie - indoor positioning and navigation control unit"};
  app.require_subcommand(1);

  std::string calibrate_path;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a cubic RSSI-to-distance model to a CSV of samples");
  calibrate->add_option("samples", calibrate_path, "CSV with header rssi_dbm,distance_m")->required();

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo localization accuracy report");
  evaluate->add_option("--sigma", eval.sigmas, "RSSI noise in dB; a comma list runs a sweep")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber)
      ->required();
  evaluate->add_option("--trials", eval.trials, "Random positions per sigma")->check(CLI::PositiveNumber)->required();
  evaluate->add_option("--seed", eval.seed, "Random seed")->required();
  evaluate->add_option("--models", eval.models, "Estimators to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"cubic", "logdist"}));
  evaluate->add_option("--out", eval.out_dir, "Report directory");
  evaluate->add_option("--plan", eval.plan, "Floor plan JSON")->check(CLI::ExistingFile);

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the control-unit service");
  serve->add_option("--config", serve_config, "Service config (default: $AMIE_CONFIG)");

  std::string replay_trace, replay_config, replay_expect;
  auto* replay = app.add_subcommand("replay", "Re-run a recorded request trace and diff the responses");
  replay->add_option("trace", replay_trace, "One request frame per line")->required()->check(CLI::ExistingFile);
  replay->add_option("--config", replay_config, "Service config (default: $AMIE_CONFIG)");
  replay->add_option("--expect", replay_expect, "Expected response frames")->check(CLI::ExistingFile);

  std::string walk_plan = reference_floorplan_path(), walk_lang = "en", walk_dest = "digital_lab";
  auto* walkthrough = app.add_subcommand("walkthrough", "Run the canonical guided walk and print each direction");
  walkthrough->add_option("--plan", walk_plan, "Floor plan JSON")->check(CLI::ExistingFile);
  walkthrough->add_option("--lang", walk_lang, "en or ar")->check(CLI::IsMember({"en", "ar"}));
  walkthrough->add_option("--dest", walk_dest, "Destination poi key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*calibrate) return cmd_calibrate(calibrate_path);
    if (*evaluate) return cmd_evaluate(eval);
    if (*serve) return cmd_serve(serve_config);
    if (*replay) return cmd_replay(replay_trace, replay_config, replay_expect);
    if (*walkthrough) return cmd_walkthrough(walk_plan, walk_lang, walk_dest);
  } catch (const Error& e) {
    std::cerr << "error: " << e.code_string() << ": " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
