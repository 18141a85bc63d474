#pragma once

#include "dclust/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dclust::cli {

// A scenario plus the run metadata the subcommands need.
struct ScenarioFile {
  std::string label;
  std::string output_dir;
  int bins = 50;
  std::vector<std::int64_t> n_list{250, 500, 1000, 2000};
  std::size_t theta = 1;
  std::int64_t oracle_particles = 100000;
  std::int64_t lln_trials = 200;
  ScenarioConfig config;

  bool operator==(const ScenarioFile&) const = default;
};

ScenarioFile parse_scenario_file(std::string_view text);
ScenarioFile load_scenario_file(const std::filesystem::path& path);
std::string to_json(const ScenarioFile& file);

// Wraps a built-in scenario with default metadata.
ScenarioFile builtin_scenario_file(std::string_view name);

}  // namespace dclust::cli
