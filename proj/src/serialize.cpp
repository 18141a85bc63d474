#include "dclust/errors.hpp"
#include "dclust/json_io.hpp"

#include <algorithm>

namespace dclust {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  if (!obj.is_object()) throw MalformedConfig(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw MalformedConfig("unknown key '" + key + "' in " + std::string(where));
  }
}

namespace {

json drift_to_json(const DriftSpec& drift) {
  if (const auto* affine = std::get_if<AffineDrift>(&drift))
    return {{"kind", "affine"}, {"alpha_bar", affine->alpha_bar}, {"lambda_bar", affine->lambda_bar}};
  return {{"kind", "polynomial"}, {"coefficients", std::get<PolynomialDrift>(drift).coefficients}};
}

DriftSpec drift_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw MalformedConfig("drift needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "affine") {
    reject_unknown_keys(j, {"kind", "alpha_bar", "lambda_bar"}, "affine drift");
    return AffineDrift{j.at("alpha_bar").get<double>(), j.at("lambda_bar").get<double>()};
  }
  if (kind == "polynomial") {
    reject_unknown_keys(j, {"kind", "coefficients"}, "polynomial drift");
    return PolynomialDrift{j.at("coefficients").get<std::vector<double>>()};
  }
  throw MalformedConfig("unknown drift kind '" + kind + "'");
}

json type_to_json(const NameType& t) {
  return {{"label", t.label},   {"sigma", t.sigma},     {"drift", drift_to_json(t.drift)},
          {"beta_s", t.beta_s}, {"beta_c", t.beta_c},   {"ell", t.ell},
          {"rho", t.rho},       {"lambda0", t.lambda0}, {"weight", t.weight}};
}

NameType type_from_json(const json& j) {
  reject_unknown_keys(
      j, {"label", "sigma", "drift", "beta_s", "beta_c", "ell", "rho", "lambda0", "weight"},
      "name type");
  NameType t;
  t.label = j.value("label", std::string{});
  t.sigma = j.at("sigma").get<double>();
  t.drift = drift_from_json(j.at("drift"));
  t.beta_s = j.at("beta_s").get<double>();
  t.beta_c = j.at("beta_c").get<std::vector<double>>();
  t.ell = j.at("ell").get<std::vector<double>>();
  t.rho = j.at("rho").get<double>();
  t.lambda0 = j.at("lambda0").get<double>();
  t.weight = j.at("weight").get<double>();
  return t;
}

}  // namespace

json to_json_value(const ScenarioConfig& config) {
  json types = json::array();
  for (const auto& t : config.types) types.push_back(type_to_json(t));
  const auto& r = config.risk;
  const auto& c = config.controls;
  const auto& b = config.bounds;
  return {
      {"types", std::move(types)},
      {"risk", {{"kappa", r.kappa}, {"theta", r.theta}, {"eps", r.eps}, {"x0", r.x0}}},
      {"controls",
       {{"t_end", c.t_end},
        {"dt", c.dt},
        {"moment_cap", c.moment_cap},
        {"trials", c.trials},
        {"seed", c.seed},
        {"closure", std::string(to_string(c.closure))}}},
      {"pool_size", config.pool_size},
      {"rank", config.rank()},
      {"bounds",
       {{"k_bdd", b.k_bdd}, {"sigma_lower", b.sigma_lower}, {"dissipativity_k", b.dissipativity_k}}},
  };
}

ScenarioConfig config_from_json_value(const json& doc) {
  try {
    reject_unknown_keys(doc, {"types", "risk", "controls", "pool_size", "rank", "bounds"},
                        "scenario config");
    ScenarioConfig config;
    for (const auto& t : doc.at("types")) config.types.push_back(type_from_json(t));

    const auto& r = doc.at("risk");
    reject_unknown_keys(r, {"kappa", "theta", "eps", "x0"}, "risk");
    config.risk = {r.at("kappa").get<double>(), r.at("theta").get<double>(),
                   r.at("eps").get<double>(), r.at("x0").get<double>()};

    const auto& c = doc.at("controls");
    reject_unknown_keys(c, {"t_end", "dt", "moment_cap", "trials", "seed", "closure"}, "controls");
    config.controls.t_end = c.at("t_end").get<double>();
    config.controls.dt = c.at("dt").get<double>();
    config.controls.moment_cap = c.at("moment_cap").get<int>();
    config.controls.trials = c.at("trials").get<std::int64_t>();
    config.controls.seed = c.value("seed", std::uint64_t{0});
    config.controls.closure = closure_from_string(c.value("closure", std::string{"copy_last"}));

    config.pool_size = doc.at("pool_size").get<std::int64_t>();
    if (doc.contains("bounds")) {
      const auto& b = doc.at("bounds");
      reject_unknown_keys(b, {"k_bdd", "sigma_lower", "dissipativity_k"}, "bounds");
      config.bounds.k_bdd = b.value("k_bdd", config.bounds.k_bdd);
      config.bounds.sigma_lower = b.value("sigma_lower", config.bounds.sigma_lower);
      config.bounds.dissipativity_k = b.value("dissipativity_k", config.bounds.dissipativity_k);
    }
    const auto rank = doc.at("rank").get<std::size_t>();
    check_structure(config);
    if (rank != config.rank())
      throw MalformedConfig("declared rank " + std::to_string(rank) +
                            " does not match beta_c length " + std::to_string(config.rank()));
    return config;
  } catch (const json::exception& e) {
    throw MalformedConfig(std::string("scenario config: ") + e.what());
  }
}

std::string to_json(const ScenarioConfig& config) { return to_json_value(config).dump(2) + "\n"; }

ScenarioConfig config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedConfig(std::string("invalid JSON: ") + e.what());
  }
  return config_from_json_value(doc);
}

}  // namespace dclust
