#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "newsdesk/config.hpp"
#include "newsdesk/error.hpp"
#include "newsdesk/pipeline.hpp"

namespace {

using newsdesk::PipelineConfig;
namespace pl = newsdesk::pipeline;

std::string flag_name(std::string_view key) {
  std::string s = "--";
  for (char c : key) s += c == '_' ? '-' : c;
  return s;
}

const std::vector<std::pair<std::string, std::function<std::string(const PipelineConfig&)>>>& stages() {
  static const std::vector<std::pair<std::string, std::function<std::string(const PipelineConfig&)>>> s = {
      {"ingest", pl::run_ingest}, {"extract", pl::run_extract}, {"pairs", pl::run_pairs},
      {"train", pl::run_train},   {"eval", pl::run_eval},       {"rank", pl::run_rank},
      {"agree", pl::run_agree},   {"report", pl::run_report}};
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homepage card extraction, prominence pairs, comparators and ranking agreement"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "Pipeline config file (flat key = value)");

  // One flag per config key; flags win over the file.
  std::map<std::string, std::optional<std::string>> overrides;
  for (auto key : PipelineConfig::keys()) {
    auto& slot = overrides[std::string(key)];
    app.add_option_function<std::string>(
        flag_name(key), [&slot](const std::string& v) { slot = v; }, "Overrides config key " + std::string(key));
  }

  std::vector<std::string> bundle_args;
  std::vector<std::string> chosen;
  for (const auto& [name, fn] : stages()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " stage");
    if (name == "ingest") sub->add_option("bundles", bundle_args, "Bundle directories or directories of bundles");
    sub->callback([&chosen, n = name] { chosen.push_back(n); });
  }
  app.add_subcommand("run", "Run every stage in order")->callback([&chosen] { chosen.push_back("run"); });

  CLI11_PARSE(app, argc, argv);

  const std::string stage = chosen.empty() ? "" : chosen.front();
  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::from_file(config_path);
    for (auto key : PipelineConfig::keys()) {
      if (const auto& v = overrides[std::string(key)]; v) cfg.set(key, *v);
    }
    if (!bundle_args.empty()) cfg.bundles.assign(bundle_args.begin(), bundle_args.end());

    for (const auto& [name, fn] : stages()) {
      if (stage != "run" && stage != name) continue;
      const std::string summary = fn(cfg);
      std::printf("%s: %s\n", name.c_str(), summary.c_str());
    }
  } catch (const newsdesk::Error& e) {
    std::fprintf(stderr, "error[%s] %s\n", std::string(e.code_name()).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[INTERNAL] %s: %s\n", stage.c_str(), e.what());
    return 3;
  }
  return 0;
}
