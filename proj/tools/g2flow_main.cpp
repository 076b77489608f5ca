#include <CLI11.hpp>

#include "g2flow/app/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Laplacian flow of closed G2 structures: checks, flows and diagnostics"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out = ".";
  int dt_halve = 0;
  std::uint64_t seed = 0;
  for (const char* name : {"check", "flow", "diagnose"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario, "scenario JSON file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--dt-halve", dt_halve, "number of dt halvings")->check(CLI::Range(0, 12));
    sub->add_option("--seed", seed, "seed for randomized checks");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return g2::kExitUsage;
  }

  g2::RunOptions opt;
  opt.out_dir = out;
  opt.dt_halve = dt_halve;
  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) opt.seed = seed;
  return g2::run_command(sub->get_name(), scenario, opt);
}
