// fraclap <experiment> --config <file> [--out <dir>] [--seed <int>] [--threads <int>]
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fraclap/cli_io.hpp"
#include "fraclap/error.hpp"

namespace {

enum Exit { ok = 0, validation = 1, computation = 2, io = 3 };

int exit_code(fraclap::ErrorKind kind) {
  switch (kind) {
    case fraclap::ErrorKind::parse:
    case fraclap::ErrorKind::validation:
    case fraclap::ErrorKind::precondition:
    case fraclap::ErrorKind::invalid_order:
    case fraclap::ErrorKind::invalid_exponent:
      return validation;
    case fraclap::ErrorKind::io:
      return io;
    default:
      return computation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional Laplacian experiments"};
  app.set_version_flag("--version", std::string(fraclap::version()));
  std::string experiment, config_path, out_dir;
  std::int64_t seed = -1;
  int threads = 0;
  const auto names = fraclap::experiment_names();
  app.add_option("experiment", experiment, "Experiment to run")->required()->check(CLI::IsMember(names));
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", seed, "Seed (overrides the config)")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "Worker threads (default: FRACLAP_THREADS or 1)")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : validation;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("FRACLAP_THREADS")) {
      threads = std::atoi(env);
      if (threads < 1) {
        std::cerr << "error: FRACLAP_THREADS must be a positive integer\n";
        return validation;
      }
    } else {
      threads = 1;
    }
  }
  fraclap::set_threads(threads);

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config " << config_path << "\n";
    return io;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  try {
    auto cfg = fraclap::parse_config(buf.str(), experiment);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    const auto man = fraclap::run(cfg);
    for (const auto& c : man.checks)
      std::cout << (c.passed ? "ok   " : (c.asserted ? "FAIL " : "note ")) << c.name << "  " << c.detail << "\n";
    std::cout << "manifest: " << cfg.output_dir << "/manifest.json (" << man.wall_seconds << " s)\n";
    return man.passed() ? ok : computation;
  } catch (const fraclap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return computation;
  }
}
