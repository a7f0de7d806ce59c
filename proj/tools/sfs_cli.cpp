#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "sfs/commands.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kNoConvergence = 3, kIoError = 4 };

int run(const std::string& command, const std::string& config_path, const sfs::CommandOptions& opts) {
  const sfs::RunConfig cfg = sfs::RunConfig::load(config_path);
  if (command == "render") {
    sfs::cmd_render(cfg, opts);
  } else if (command == "reconstruct") {
    if (!sfs::cmd_reconstruct(cfg, opts).converged) return kNoConvergence;
  } else if (command == "evaluate") {
    sfs::cmd_evaluate(cfg, opts);
  } else {
    sfs::cmd_bench(cfg, opts);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape from shading: render synthetic scenes and reconstruct heights from images"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::size_t> threads;
  const std::pair<const char*, const char*> commands[] = {
      {"render", "Render a synthetic scene to image, mask and ground-truth files"},
      {"reconstruct", "Reconstruct a height field from an image"},
      {"evaluate", "Compare a reconstruction with its input image and a reference height"},
      {"bench", "Run one of the benchmark tables"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run configuration file (key = value lines)")->required();
    sub->add_option("--out-dir", out_dir, "Directory for outputs and relative paths");
    sub->add_option("--threads", threads, "Worker threads (default: SFS_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  sfs::CommandOptions opts;
  opts.out_dir = out_dir;
  opts.threads = threads;
  opts.log = &std::cerr;
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return run(command, config_path, opts);
  } catch (const sfs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const sfs::NoConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const sfs::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const sfs::MalformedHeader& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const sfs::UnsupportedDepth& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const sfs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
