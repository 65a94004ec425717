// Command-line entry point: run, batch, replay, serve.

#include "ctxtrack/bridge_server.hpp"
#include "ctxtrack/harness.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

using namespace ctxtrack;

namespace {

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

int cmd_run(const std::string& scenario, std::uint64_t seed, const std::string& config_path, const std::string& trace) {
  const auto script = load_scenario(scenario);
  const auto config = config_or_default(config_path);
  const auto result = run_trial(script, config, seed);
  if (!trace.empty()) save_trace(trace, result.trace);
  std::cout << metrics_json(result.metrics).dump(2) << '\n';
  return 0;
}

int cmd_batch(const std::vector<std::string>& scenarios, int trials, std::uint64_t seed, const std::string& config_path,
              const std::string& json_path, unsigned threads) {
  std::vector<ScenarioScript> scripts;
  for (const auto& s : scenarios) scripts.push_back(load_scenario(s));
  const auto config = config_or_default(config_path);
  const auto start = std::chrono::steady_clock::now();
  const auto reports = run_batch(scripts, config, {trials, seed, threads});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  print_report(std::cout, reports);
  std::cout << "elapsed " << secs << " s\n";
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write " + json_path);
    out << report_json(reports).dump(2) << '\n';
  }
  return 0;
}

int cmd_replay(const std::string& path, bool verify) {
  const Trace trace = load_trace(path);
  const TrialMetrics metrics = compute_metrics(trace);
  std::cout << metrics_json(metrics).dump(2) << '\n';
  if (!verify) return 0;
  const bool keep = !trace.ticks.empty() && !trace.ticks.front().particles.empty();
  const auto rerun = run_trial(trace.header.script, trace.header.config, trace.header.seed, keep);
  std::ifstream in(path);
  const std::string stored((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (trace_string(rerun.trace) != stored || !(rerun.metrics == metrics)) {
    std::cerr << "replay: re-simulation differs from the stored trace\n";
    return 1;
  }
  std::cerr << "replay: re-simulation matches the stored trace\n";
  return 0;
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int cmd_serve(const std::string& scenario, std::uint64_t seed, const std::string& config_path, const std::string& address,
              unsigned short port, const std::string& trace) {
  const auto script = load_scenario(scenario);
  const auto config = config_or_default(config_path);
  Session session(script, config, seed, trace.empty() ? 0 : config.trace.particles);
  BridgeServer server(session, address, port);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  std::cerr << "serving " << script.name << " on ws://" << address << ':' << server.port() << '\n';
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::cerr << "stopped after " << session.simulation().tick() << " ticks\n";
  if (!trace.empty()) save_trace(trace, session.trace());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-aware active target tracking simulator"};
  app.require_subcommand(1);

  std::string scenario, config_path, trace_path, json_path;
  std::vector<std::string> scenarios;
  std::uint64_t seed = 0;
  int trials = 20;
  unsigned threads = 0;
  bool verify = false;

  auto* run = app.add_subcommand("run", "Run one trial");
  run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  run->add_option("--trace", trace_path, "Write the JSONL trace here");

  auto* batch = app.add_subcommand("batch", "Run seeded trials and print an aggregate report");
  batch->add_option("--scenario", scenarios, "Scenario file(s)")->required()->check(CLI::ExistingFile);
  batch->add_option("--trials", trials, "Trials per scenario")->check(CLI::PositiveNumber);
  batch->add_option("--seed", seed, "Master seed");
  batch->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  batch->add_option("--json", json_path, "Write the machine-readable summary here");
  batch->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string address = "127.0.0.1";
  unsigned short port = 8765;
  auto* serve = app.add_subcommand("serve", "Run a live session and accept adversary commands over WebSocket");
  serve->add_option("--port", port, "TCP port (0 picks a free one)");
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  serve->add_option("--seed", seed, "Master seed");
  serve->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  serve->add_option("--trace", trace_path, "Write the session trace here on shutdown");

  auto* config = app.add_subcommand("config", "Print the effective configuration (defaults merged with --config)");
  config->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);

  auto* replay = app.add_subcommand("replay", "Recompute metrics from a stored trace");
  replay->add_option("--trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  replay->add_flag("--verify", verify, "Also re-simulate and compare byte-for-byte");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario, seed, config_path, trace_path);
    if (batch->parsed()) return cmd_batch(scenarios, trials, seed, config_path, json_path, threads);
    if (replay->parsed()) return cmd_replay(trace_path, verify);
    if (serve->parsed()) return cmd_serve(scenario, seed, config_path, address, port, trace_path);
    if (config->parsed()) {
      std::cout << config_json(config_or_default(config_path)).dump(2) << '\n';
      return 0;
    }
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
