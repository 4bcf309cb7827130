// Command-line front end for the RTM pipeline.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rtm/config.hpp"
#include "rtm/error.hpp"
#include "rtm/pipeline.hpp"
#include "rtm/text_io.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<long long> seed;
  std::string out = ".";
  int jobs = 1;
  std::string stage;
};

void addCommon(CLI::App* app, Common& c, bool configRequired) {
  auto* opt = app->add_option("--config", c.config, "run configuration file");
  if (configRequired) opt->required();
  app->add_option("--seed", c.seed, "overrides the configured seed")->check(CLI::NonNegativeNumber);
  app->add_option("--out", c.out, "output directory (or report file for evaluate)");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

rtm::RunConfig loadConfig(const Common& c) {
  rtm::RunConfig cfg = rtm::loadRunConfig(c.config);
  if (c.seed) {
    cfg.seed = static_cast<std::uint64_t>(*c.seed);
    cfg.baseGrid.seed = cfg.finalGrid.seed = *cfg.seed;
  }
  return cfg;
}

rtm::PipelineOptions options(const Common& c) {
  rtm::PipelineOptions opt;
  opt.outDir = c.out;
  opt.jobs = c.jobs;
  opt.timings = true;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Referential translation machine pipeline"};
  app.set_version_flag("--version", std::string(rtm::kToolVersion));
  app.require_subcommand(1);

  Common common;
  std::string predictions, gold;
  std::string epsilon = "half_mae";

  std::vector<std::pair<CLI::App*, std::string>> stages;
  for (const auto& name : rtm::stageNames()) {
    if (name == "evaluate") continue;
    auto* sub = app.add_subcommand(name, "run the " + name + " stage");
    addCommon(sub, common, true);
    stages.emplace_back(sub, name);
  }

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  addCommon(evaluate, common, false);
  evaluate->add_option("--predictions", predictions, "predictions TSV");
  evaluate->add_option("--gold", gold, "gold TSV (dataset file or id/gold table)");
  evaluate->add_option("--epsilon", epsilon, "half_mae or half_mean_deviation")
      ->check(CLI::IsMember({"half_mae", "half_mean_deviation"}));

  auto* run = app.add_subcommand("run", "run every stage, or one with --stage");
  addCommon(run, common, true);
  run->add_option("--stage", common.stage, "single stage to run")->check(CLI::IsMember(rtm::stageNames()));

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [sub, name] : stages)
      if (sub->parsed()) rtm::runStage(name, loadConfig(common), options(common));

    if (evaluate->parsed()) {
      if (!predictions.empty() || !gold.empty()) {
        if (predictions.empty() || gold.empty()) throw rtm::Error("evaluate needs both --predictions and --gold");
        rtm::MetricConfig mc;
        mc.mode = epsilon == "half_mae" ? rtm::EpsilonMode::HalfMAE : rtm::EpsilonMode::HalfMeanDeviation;
        const std::string text = rtm::evaluateFiles(predictions, gold, mc).format();
        if (evaluate->count("--out")) rtm::writeFileAtomic(common.out, text);
        else std::cout << text;
      } else if (!common.config.empty()) {
        rtm::runStage("evaluate", loadConfig(common), options(common));
      } else {
        throw rtm::Error("evaluate needs --config or --predictions with --gold");
      }
    }

    if (run->parsed()) {
      if (common.stage.empty()) rtm::runPipeline(loadConfig(common), options(common));
      else rtm::runStage(common.stage, loadConfig(common), options(common));
    }
  } catch (const std::exception& e) {
    std::cerr << "rtm: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
