// hnoise: Hamiltonian-noise benchmark for quantum annealers.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hnoise/errors.hpp"
#include "hnoise/pipeline/commands.hpp"
#include "hnoise/pipeline/config.hpp"
#include "hnoise/pipeline/manifest.hpp"

namespace hp = hnoise::pipeline;

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> schedules;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> qubits;
  std::vector<std::string> sets;
};

hp::PipelineConfig effective_config(const GlobalFlags& flags) {
  hp::PipelineConfig config = flags.config_path.empty() ? hp::default_config()
                                                        : hp::load_config(flags.config_path);
  for (const auto& assignment : flags.sets) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw hnoise::ConfigError("--set expects section.key=value, got '" + assignment + "'");
    }
    hp::set_field(config, assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out) hp::set_field(config, "run.out_dir", *flags.out);
  if (flags.schedules) hp::set_field(config, "schedules.t_a_us", *flags.schedules);
  if (flags.runs) config.n_runs = *flags.runs;
  if (flags.qubits) config.n_qubits = *flags.qubits;
  hp::validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian-noise benchmark: synthesize, sample, calibrate and analyze bias noise"};
  app.set_version_flag("--version", std::string("hnoise ") + hp::tool_version());
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "master seed");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--schedules", flags.schedules, "annealing times in us, comma separated");
  app.add_option("--runs", flags.runs, "runs per schedule (N)");
  app.add_option("--qubits", flags.qubits, "qubit count (n)");
  app.add_option("--set", flags.sets, "override a config field: section.key=value");

  struct Command {
    const char* name;
    const char* help;
    hp::CommandResult (*run)(const hp::PipelineConfig&);
  };
  const Command commands[] = {
      {"synth", "write the injected noise traces per qubit", hp::cmd_synth},
      {"run", "sample degenerate runs, one JSONL per schedule", hp::cmd_run},
      {"calibrate", "bias sweeps and alpha per annealing time", hp::cmd_calibrate},
      {"analyze", "correlations, spectra, global fit and plots", hp::cmd_analyze},
      {"report", "summary and plot from a finished analysis", hp::cmd_report},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const hp::PipelineConfig config = effective_config(flags);
    for (const auto& c : commands) {
      if (!app.got_subcommand(c.name)) continue;
      const hp::CommandResult result = c.run(config);
      for (const auto& m : result.messages) std::cout << m << '\n';
      std::cout << c.name << ": wrote " << result.files.size() << " file(s) to "
                << config.out_dir.string() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    const int code = hp::exit_code_for(std::current_exception());
    std::cerr << "hnoise: " << (code == 5 ? "internal error: " : "") << e.what() << '\n';
    return code;
  } catch (...) {
    std::cerr << "hnoise: internal error\n";
    return 5;
  }
}
