#include "scenario_file.hpp"

#include "dclust/csv.hpp"
#include "dclust/errors.hpp"
#include "dclust/json_io.hpp"
#include "dclust/scenarios.hpp"

namespace dclust::cli {

using nlohmann::json;

ScenarioFile parse_scenario_file(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedConfig(std::string("invalid JSON: ") + e.what());
  }
  reject_unknown_keys(doc,
                      {"label", "output_dir", "bins", "n_list", "theta", "oracle_particles", "lln_trials", "config"},
                      "scenario file");
  try {
    ScenarioFile file;
    file.label = doc.value("label", std::string{"scenario"});
    file.output_dir = doc.value("output_dir", "out/" + file.label);
    file.bins = doc.value("bins", file.bins);
    file.n_list = doc.value("n_list", file.n_list);
    file.theta = doc.value("theta", file.theta);
    file.oracle_particles = doc.value("oracle_particles", file.oracle_particles);
    file.lln_trials = doc.value("lln_trials", file.lln_trials);
    if (!doc.contains("config")) throw MalformedConfig("scenario file needs a 'config' object");
    file.config = config_from_json_value(doc.at("config"));
    if (file.bins < 1) throw MalformedConfig("bins must be at least 1");
    if (file.oracle_particles < 1) throw MalformedConfig("oracle_particles must be positive");
    if (file.lln_trials < 1) throw MalformedConfig("lln_trials must be positive");
    return file;
  } catch (const json::exception& e) {
    throw MalformedConfig(std::string("scenario file: ") + e.what());
  }
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  return parse_scenario_file(read_text_file(path));
}

std::string to_json(const ScenarioFile& file) {
  nlohmann::ordered_json doc;
  doc["label"] = file.label;
  doc["output_dir"] = file.output_dir;
  doc["bins"] = file.bins;
  doc["n_list"] = file.n_list;
  doc["theta"] = file.theta;
  doc["oracle_particles"] = file.oracle_particles;
  doc["lln_trials"] = file.lln_trials;
  doc["config"] = nlohmann::ordered_json::parse(to_json_value(file.config).dump());
  return doc.dump(2) + "\n";
}

ScenarioFile builtin_scenario_file(std::string_view name) {
  ScenarioFile file;
  file.label = std::string(name);
  file.output_dir = "out/" + file.label;
  file.config = builtin_scenario(name);
  return file;
}

}  // namespace dclust::cli
