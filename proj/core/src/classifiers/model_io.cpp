#include <fstream>

#include "json.hpp"
#include "pdvoice/classifiers.hpp"
#include "pdvoice/errors.hpp"
#include "pdvoice/version.hpp"

namespace pdvoice::ml {

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json params_to_json(const ParamMap& params) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : params) {
    if (std::holds_alternative<int>(value))
      out[name] = std::get<int>(value);
    else if (std::holds_alternative<double>(value))
      out[name] = std::get<double>(value);
    else
      out[name] = std::get<std::string>(value);
  }
  return out;
}

ParamMap params_from_json(const nlohmann::json& j) {
  ParamMap out;
  for (const auto& [name, value] : j.items()) {
    if (value.is_number_integer())
      out[name] = value.get<int>();
    else if (value.is_number_float())
      out[name] = value.get<double>();
    else if (value.is_string())
      out[name] = value.get<std::string>();
    else
      throw DataError("model file: bad hyperparameter type for " + name);
  }
  return out;
}

}  // namespace

void save_model(const Classifier& model, const std::string& path) {
  if (!model.fitted())
    throw PreconditionError("save_model: model is not fitted");
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["tool"] = std::string(kToolName) + " " + kVersion;
  j["family"] = family_name(model.spec().family);
  j["seed"] = model.spec().seed;
  j["params"] = params_to_json(model.spec().params);
  nlohmann::json state = nlohmann::json::object();
  for (const auto& [name, values] : model.state()) state[name] = values;
  j["state"] = std::move(state);

  std::ofstream out(path);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

std::unique_ptr<Classifier> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path + ": " + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
    throw DataError("model file " + path + ": unsupported format version");

  ModelSpec spec;
  spec.family = parse_family(j.at("family").get<std::string>());
  spec.seed = j.value("seed", 0ULL);
  spec.params = params_from_json(j.at("params"));

  auto model = make_classifier(spec);
  std::map<std::string, std::vector<double>> state;
  for (const auto& [name, values] : j.at("state").items())
    state[name] = values.get<std::vector<double>>();
  model->restore(state);
  return model;
}

}  // namespace pdvoice::ml
