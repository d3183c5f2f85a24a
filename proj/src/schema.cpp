#include "pollnet/schema.hpp"

#include <set>
#include <string>

#include "json.hpp"

#include "pollnet/errors.hpp"

namespace pollnet {

namespace {

FeatureDef feature(std::string name, std::vector<std::string> labels) {
  FeatureDef def;
  def.name = std::move(name);
  def.categories.reserve(labels.size());
  int id = 1;
  for (auto& label : labels) {
    def.categories.push_back({id++, std::move(label)});
  }
  return def;
}

void validate_feature(const FeatureDef& def, const std::string& role) {
  if (def.name.empty()) throw DataError("schema: " + role + " has an empty name");
  if (def.categories.size() < 2) {
    throw DataError("schema: " + role + " '" + def.name + "' needs at least 2 categories");
  }
  std::set<std::string> labels;
  int expected = 1;
  for (const auto& category : def.categories) {
    if (category.id != expected) {
      throw DataError("schema: " + role + " '" + def.name + "' has category id " +
                      std::to_string(category.id) + " where " + std::to_string(expected) +
                      " was expected (ids must be 1..k with no gaps)");
    }
    ++expected;
    if (!labels.insert(category.label).second) {
      throw DataError("schema: " + role + " '" + def.name + "' repeats label '" + category.label +
                      "'");
    }
  }
}

FeatureDef feature_from_json(const nlohmann::json& j, const std::string& role) {
  if (!j.is_object() || !j.contains("name") || !j.contains("categories")) {
    throw DataError("schema: " + role + " must be an object with 'name' and 'categories'");
  }
  FeatureDef def;
  def.name = j.at("name").get<std::string>();
  for (const auto& c : j.at("categories")) {
    if (!c.is_object() || !c.contains("id") || !c.contains("label")) {
      throw DataError("schema: categories of '" + def.name +
                      "' must be objects with 'id' and 'label'");
    }
    def.categories.push_back({c.at("id").get<int>(), c.at("label").get<std::string>()});
  }
  return def;
}

nlohmann::json feature_to_json(const FeatureDef& def) {
  nlohmann::json categories = nlohmann::json::array();
  for (const auto& category : def.categories) {
    categories.push_back({{"id", category.id}, {"label", category.label}});
  }
  return {{"name", def.name}, {"categories", categories}};
}

}  // namespace

void validate(const FeatureSchema& schema) {
  if (schema.features.empty()) throw DataError("schema: no input features");
  std::set<std::string> names;
  for (const auto& def : schema.features) {
    validate_feature(def, "feature");
    if (!names.insert(def.name).second) {
      throw DataError("schema: duplicate feature name '" + def.name + "'");
    }
  }
  validate_feature(schema.target, "target");
  if (names.count(schema.target.name) != 0) {
    throw DataError("schema: target name '" + schema.target.name + "' collides with a feature");
  }
}

FeatureSchema default_schema() {
  FeatureSchema schema;
  schema.features = {
      feature("Age of people", {"Old", "Middle-aged", "Young"}),
      feature("Degree of people", {"PhD", "Masters", "BA", "Under license"}),
      feature("Jobs of People", {"Government employees", "Professors and university staff",
                                 "Free jobs"}),
      feature("Political Orientation of people", {"Reformists", "Fundamentalists", "Velayi"}),
      feature("Opinion of people about government services",
              {"Mortgage", "targeted subsidies", "Marriage Loans", "Fuel Rationing"}),
      feature("Opinion of people about Participation type in elections",
              {"Religious duty and religious", "Participation in decision making",
               "Overall reform"}),
      feature("Opinion of people about general policy in international affairs",
              {"Resistance", "Negotiation", "Concessions"}),
      feature("Opinion of people about the election officials",
              {"Higher accuracy", "Confidence", "Unreliability"}),
      feature("Opinion of people about Candidates",
              {"Popular candidate", "Party candidate", "Political elite"}),
  };
  schema.target = feature("Opinion of people about Participation in elections",
                          {"Partnership", "possible participation", "Without participation"});
  return schema;
}

FeatureSchema parse_schema(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
  if (!j.is_object() || !j.contains("features") || !j.contains("target")) {
    throw DataError("schema: document must be an object with 'features' and 'target'");
  }
  FeatureSchema schema;
  try {
    for (const auto& f : j.at("features")) {
      schema.features.push_back(feature_from_json(f, "feature"));
    }
    schema.target = feature_from_json(j.at("target"), "target");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
  validate(schema);
  return schema;
}

std::string dump_schema(const FeatureSchema& schema) {
  validate(schema);
  nlohmann::json features = nlohmann::json::array();
  for (const auto& def : schema.features) {
    features.push_back(feature_to_json(def));
  }
  nlohmann::json j{{"features", features}, {"target", feature_to_json(schema.target)}};
  return j.dump(2) + "\n";
}

}  // namespace pollnet
