#include "bdlab/serialize.hpp"

#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace bdlab {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_probability(double value) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

double parse_probability(const json& j, const char* what) {
  if (j.is_string()) return std::strtod(j.get_ref<const std::string&>().c_str(), nullptr);
  if (j.is_number()) return j.get<double>();
  throw std::invalid_argument(std::string("expected decimal string for ") + what);
}

ordered_json row_to_json(const std::vector<double>& row) {
  ordered_json out = ordered_json::array();
  for (double v : row) out.push_back(format_probability(v));
  return out;
}

std::vector<double> row_from_json(const json& j, const char* what) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(parse_probability(v, what));
  return out;
}

ordered_json task_body(const FiniteTask& task) {
  ordered_json doc;
  ordered_json inputs = ordered_json::array();
  for (const auto& c : task.coords) inputs.push_back(row_to_json(c));
  doc["inputs"] = std::move(inputs);
  doc["prior"] = row_to_json(task.prior);
  doc["labels"] = task.num_labels;
  ordered_json cond = ordered_json::array();
  for (const auto& row : task.conditional) cond.push_back(row_to_json(row));
  doc["conditional"] = std::move(cond);
  return doc;
}

ordered_json spec_body(const BackdoorSpec& spec) {
  ordered_json doc;
  ordered_json trig;
  trig["region"] = spec.trigger.region;
  trig["image"] = spec.trigger.image;
  doc["trigger"] = std::move(trig);
  doc["target"] = spec.target;
  doc["beta"] = format_probability(spec.beta);
  ordered_json tc = ordered_json::object();
  // Keys sorted numerically for a stable byte layout.
  std::vector<std::size_t> keys;
  for (const auto& [x, row] : spec.target_conditional) keys.push_back(x);
  std::sort(keys.begin(), keys.end());
  for (std::size_t x : keys)
    tc[std::to_string(x)] = row_to_json(spec.target_conditional.at(x));
  doc["target_conditional"] = std::move(tc);
  return doc;
}

FiniteTask task_from(const json& doc) {
  FiniteTask task;
  for (const auto& row : doc.at("inputs"))
    task.coords.push_back(row_from_json(row, "inputs"));
  task.prior = row_from_json(doc.at("prior"), "prior");
  task.num_labels = doc.at("labels").get<std::size_t>();
  for (const auto& row : doc.at("conditional"))
    task.conditional.push_back(row_from_json(row, "conditional"));
  task.validate();
  return task;
}

BackdoorSpec spec_from(const json& doc) {
  BackdoorSpec spec;
  const auto& trig = doc.at("trigger");
  spec.trigger.region = trig.at("region").get<std::vector<std::size_t>>();
  spec.trigger.image = trig.at("image").get<std::vector<std::size_t>>();
  spec.target = doc.at("target").get<std::size_t>();
  spec.beta = parse_probability(doc.at("beta"), "beta");
  for (const auto& [key, row] : doc.at("target_conditional").items())
    spec.target_conditional[std::stoul(key)] = row_from_json(row, "target_conditional");
  return spec;
}

}  // namespace

std::string task_to_json(const FiniteTask& task) { return task_body(task).dump(2) + "\n"; }

FiniteTask task_from_json(const std::string& text) {
  return task_from(json::parse(text));
}

std::string spec_to_json(const BackdoorSpec& spec) { return spec_body(spec).dump(2) + "\n"; }

BackdoorSpec spec_from_json(const std::string& text) {
  return spec_from(json::parse(text));
}

std::string task_spec_to_json(const FiniteTask& task, const BackdoorSpec& spec) {
  ordered_json doc = task_body(task);
  ordered_json sp = spec_body(spec);
  for (auto& [k, v] : sp.items()) doc[k] = std::move(v);
  return doc.dump(2) + "\n";
}

std::pair<FiniteTask, BackdoorSpec> task_spec_from_json(const std::string& text) {
  json doc = json::parse(text);
  return {task_from(doc), spec_from(doc)};
}

}  // namespace bdlab
