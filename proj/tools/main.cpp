#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mass of asymptotically Robertson-Walker spacetimes: batch scenarios"};
  std::string config;
  std::string output_dir;
  app.add_option("config", config, "scenario JSON file")->required();
  app.add_option("--output-dir", output_dir, "directory for <command>.csv / .json (overrides output.path)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : arwmass::cli::kConfigError;
  }

  std::optional<std::filesystem::path> dir;
  if (!output_dir.empty()) dir = output_dir;
  const arwmass::cli::RunResult r = arwmass::cli::run_file(config, dir);
  if (!r.message.empty()) std::fprintf(stderr, "arwmass: %s\n", r.message.c_str());
  if (r.output) std::printf("%s\n", r.output->string().c_str());
  return r.exit_code;
}
