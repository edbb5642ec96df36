#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asymptotica/cli.hpp"

namespace cli = asymptotica::cli;

namespace {

const char* describe(const std::string& name) {
  if (name == "pi") return "Buckingham pi groups and span membership";
  if (name == "roots") return "perturbation expansion of a polynomial root";
  if (name == "euler") return "Euler integral against its divergent series";
  if (name == "ode") return "multiple-scales ODE against direct integration";
  if (name == "blayer") return "boundary layer against a finite-difference solve";
  return "wave packet envelope against the direct PDE";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymptotica: perturbation and multiple-scales experiments"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  int jobs = 1;
  std::string out_dir = ".";
  for (const auto& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", configs, "config file (repeatable)")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", jobs, "configs run concurrently")->check(CLI::Range(1, 1024));
    sub->add_option("--out-dir", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::ExitCode::config_error;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  std::vector<std::filesystem::path> paths(configs.begin(), configs.end());
  const auto results = cli::run_files(subcommand, paths, out_dir, jobs);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    auto& stream = r.exit_code >= cli::ExitCode::config_error ? std::cerr : std::cout;
    stream << paths[i].string() << ": " << r.message << '\n';
    for (const auto& f : r.files) std::cout << "  wrote " << f.string() << '\n';
  }
  return cli::combined_exit_code(results);
}
