// gamenet: build a per-game friendship graph corpus, embed, cluster and
// characterize it.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <filesystem>
#include <optional>

#include "gamenet/fixtures.hpp"
#include "gamenet/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gamenet;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  bool force = false;
};

PipelineConfig load_config(const GlobalOptions& opt) {
  if (opt.config.empty()) throw UsageError("--config is required");
  auto cfg = PipelineConfig::load(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.out) cfg.out = fs::absolute(*opt.out);
  if (opt.jobs) cfg.jobs = *opt.jobs;
  return cfg;
}

void report(const StageOutcome& o, const PipelineConfig& cfg) {
  fmt::print("{:<13} {}  {}\n", to_string(o.stage), o.skipped ? "up to date" : "done      ",
             (cfg.out / to_string(o.stage)).string());
}

int run(int argc, char** argv) {
  CLI::App app{"Friendship-graph corpus pipeline: sample, embed, cluster, characterize, report."};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions opt;
  app.add_option("--config", opt.config, "Pipeline configuration (JSON)");
  app.add_option("--seed", opt.seed, "Master seed (overrides the config)");
  app.add_option("--out", opt.out, "Output directory (overrides the config)");
  app.add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--force", opt.force, "Rerun stages even when up to date");

  std::optional<Stage> stage;
  for (Stage s : all_stages()) {
    app.add_subcommand(to_string(s), fmt::format("Run the {} stage", to_string(s)))->callback([&stage, s] { stage = s; });
  }
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");

  std::string fixture_kind;
  std::string fixture_dir;
  std::uint64_t fixture_seed = 1;
  std::size_t per_family = 20;
  auto* fixture = app.add_subcommand("make-fixture", "Write a synthetic input fixture");
  fixture->add_option("kind", fixture_kind, "bundled | families")
      ->required()
      ->check(CLI::IsMember({"bundled", "families"}));
  fixture->add_option("dir", fixture_dir, "Destination directory")->required();
  fixture->add_option("--fixture-seed", fixture_seed, "Generator seed");
  fixture->add_option("--per-family", per_family, "Graphs per family (families only)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (fixture->parsed()) {
    if (fixture_kind == "bundled") {
      write_bundled_fixture(fixture_dir, fixture_seed);
    } else {
      write_family_fixture(fixture_dir, per_family, fixture_seed);
    }
    fmt::print("wrote {} fixture to {}\n", fixture_kind, fixture_dir);
    return 0;
  }

  const auto cfg = load_config(opt);
  if (pipeline->parsed()) {
    for (const auto& o : run_pipeline(cfg, opt.force)) report(o, cfg);
  } else {
    report(run_stage(*stage, cfg, opt.force), cfg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 1;
  } catch (const TransientError& e) {
    fmt::print(stderr, "provider error: {}\n", e.what());
    return 3;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
