#pragma once

#include "dclust/model.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string_view>

namespace dclust {

nlohmann::json to_json_value(const ScenarioConfig& config);
ScenarioConfig config_from_json_value(const nlohmann::json& doc);

// Throws MalformedConfig if obj has a key outside `allowed` or is not an object.
void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where);

}  // namespace dclust
