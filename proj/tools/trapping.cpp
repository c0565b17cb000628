// Command line driver: one operation per invocation.
//
//   trapping <operation> --config run.json [--seed N] [--threads N] [--output-dir D] [--quiet]
//   trapping <operation> --manifest out/manifest-<hash>.json
//   trapping validate --config run.json

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trapping/cli/run.hpp"
#include "trapping/error.hpp"

namespace tc = trapping::cli;

int main(int argc, char** argv) {
  CLI::App app{"Trapping of random walks in random media: spectra, survival and assumption checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output_dir;
  bool quiet = false;

  for (const auto& op : tc::operations()) {
    auto* sub = app.add_subcommand(op, op == "validate" ? "List every constraint violation of a config"
                                                        : "Run operation " + op);
    auto* cfg = sub->add_option("--config,-c", config_path, "JSON config file");
    if (op == "validate") {
      cfg->required();
      continue;
    }
    auto* man = sub->add_option("--manifest,-m", manifest_path, "Rerun the config echoed in a manifest");
    cfg->excludes(man);
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--threads,-j", threads, "Worker threads (0: available parallelism)");
    sub->add_option("--output-dir,-o", output_dir, std::string("Output directory; overrides ") + tc::kOutputDirEnv);
    sub->add_flag("--quiet,-q", quiet, "No progress lines");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string op = app.get_subcommands().front()->get_name();

  try {
    if (op == "validate") return tc::validate_json(tc::load_json_file(config_path), std::cout);
    const tc::RunOptions opts{seed, threads, output_dir, quiet};
    if (!manifest_path.empty()) {
      const auto manifest = tc::load_json_file(manifest_path);
      if (manifest.contains("config") && manifest["config"].value("operation", op) != op) {
        std::cerr << "error: manifest records operation '" << manifest["config"]["operation"].get<std::string>()
                  << "', not '" << op << "'\n";
        return tc::kValidation;
      }
      return tc::run_manifest(manifest_path, opts, std::cout, std::cerr).exit_code;
    }
    if (config_path.empty()) {
      std::cerr << "error: one of --config or --manifest is required\n";
      return tc::kValidation;
    }
    tc::Json config = tc::load_json_file(config_path);
    if (config.is_object()) {
      if (!config.contains("operation")) config["operation"] = op;
      if (config["operation"] != op) {
        std::cerr << "error: config operation " << config["operation"].dump() << " does not match subcommand '"
                  << op << "'\n";
        return tc::kValidation;
      }
    }
    return tc::run_json(config, opts, std::cout, std::cerr).exit_code;
  } catch (const trapping::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return tc::kValidation;
  }
}
