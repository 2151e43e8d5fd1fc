#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fibdyn/parallel.hpp"
#include "fibdyn/runner.hpp"

namespace {

const char* kSubcommands[] = {"validate",       "green",    "sample",
                              "lyapunov",       "bj-check", "periodic-check",
                              "decomp-check",   "bif-scan"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale numerics for fibered endomorphisms of the projective plane"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = fibdyn::default_workers();

  for (const char* name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory for report and artifacts");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--workers", workers, "worker thread count");
  }

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("FIBERED_DYN_SEED"); env && !seed_given) {
    seed = std::strtoull(env, nullptr, 10);
    seed_given = true;
  }
  if (const char* env = std::getenv("FIBERED_DYN_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) workers = w;
  }

  fibdyn::RunOptions opt;
  opt.subcommand = app.get_subcommands().front()->get_name();
  opt.out_dir = out_dir;
  opt.workers = workers;
  if (seed_given) opt.seed_override = seed;

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open config: " << config_path << "\n";
    return 2;
  }
  try {
    in >> opt.config;
  } catch (const std::exception& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  }

  const int code = fibdyn::run_and_write(opt);
  std::ifstream rep(out_dir + "/report.json");
  std::cout << rep.rdbuf();
  return code;
}
