#include "quadlik/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

bool write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace quadlik::cli;
  CLI::App app{"quadlik: quadratic likelihood approximations, diagnostics and studies"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out_path;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "write JSON here, text to <out>.txt");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const auto config = load_config(config_path);
    const auto result = run_command(command, config, workers);
    const auto rendered =
        render(result.report, out_path.empty() ? std::nullopt : std::optional<std::string>(out_path));
    if (out_path.empty()) {
      std::cout << rendered.json;
    } else {
      bool ok = write_file(out_path, rendered.json) && write_file(out_path + ".txt", rendered.text);
      for (const auto& spill : rendered.spills) ok = ok && write_file(spill.path, spill.contents);
      if (!ok) {
        std::cerr << "error: cannot write report to " << out_path << '\n';
        return kExitInput;
      }
      std::cout << rendered.text;
    }
    return result.exit_code;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
