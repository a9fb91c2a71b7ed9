#include "carnot/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Calculus and h-convexity checks on stratified groups"};
  app.require_subcommand(1);

  carnot::RunConfig cfg;
  std::uint64_t seed = 0;
  double tol = 0.0;

  for (const auto& name : carnot::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--group", cfg.group, "builtin group (heisenberg:1, engel, ...) or descriptor file")
        ->capture_default_str();
    sub->add_option("--fn", cfg.function, "registry name, function-spec file or inline JSON");
    sub->add_option("--point", cfg.points, "comma-separated coordinates; repeat for y or h");
    sub->add_option("--plan-file", cfg.plan_file, "sampling plan overrides (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out, "JSON report path; curves go to the same stem with .csv");
    sub->add_option("--seed", seed, "sampling seed");
    sub->add_option("--tol", tol, "override the command's headline tolerance");
    sub->add_flag("--force", cfg.force, "skip descriptor validation");
    sub->callback([&cfg, sub] { cfg.command = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return carnot::kExitConfig;
  }

  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--tol")) cfg.tol = tol;
  }
  return carnot::run_command(cfg, std::cout, std::cerr).status;
}
