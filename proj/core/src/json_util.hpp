#ifndef BDI_SRC_JSON_UTIL_HPP
#define BDI_SRC_JSON_UTIL_HPP

#include <nlohmann/json.hpp>

#include "bdi/kernel.hpp"
#include "bdi/losses.hpp"
#include "bdi/report.hpp"

namespace bdi::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json kernel_to_json(const KernelSpec& spec) {
  ordered_json j;
  j["kind"] = kernel_kind_name(spec.kind);
  if (spec.kind == KernelKind::Ntk) {
    j["depth"] = spec.depth;
    j["weight_variance"] = spec.weight_variance;
    j["bias_variance"] = spec.bias_variance;
  } else {
    j["bandwidth"] = spec.bandwidth;
  }
  return j;
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  KernelSpec spec;
  spec.kind = kernel_kind_from_name(j.at("kind").get<std::string>());
  if (spec.kind == KernelKind::Ntk) {
    spec.depth = j.at("depth").get<int>();
    spec.weight_variance = j.at("weight_variance").get<double>();
    spec.bias_variance = j.at("bias_variance").get<double>();
  } else {
    spec.bandwidth = j.at("bandwidth").get<double>();
  }
  return spec;
}

inline ordered_json config_to_json(const BdiConfig& cfg) {
  ordered_json j;
  j["target_score"] = cfg.target_score;
  j["weight_param"] = cfg.weight_param;
  j["regularization"] = cfg.regularization;
  j["steps"] = cfg.steps;
  j["learning_rate"] = cfg.learning_rate;
  j["num_designs"] = cfg.num_designs;
  j["mode"] = mode_name(cfg.mode);
  j["backward_weight"] = cfg.backward_weight;
  j["multi_design_mode"] = multi_mode_name(cfg.multi_mode);
  j["grad"] = grad_mode_name(cfg.grad_mode);
  return j;
}

inline BdiConfig config_from_json(const nlohmann::json& j) {
  BdiConfig cfg;
  cfg.target_score = j.at("target_score").get<double>();
  cfg.weight_param = j.at("weight_param").get<double>();
  cfg.regularization = j.at("regularization").get<double>();
  cfg.steps = j.at("steps").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.num_designs = j.at("num_designs").get<int>();
  cfg.mode = mode_from_name(j.at("mode").get<std::string>());
  cfg.backward_weight = j.at("backward_weight").get<double>();
  cfg.multi_mode =
      multi_mode_from_name(j.at("multi_design_mode").get<std::string>());
  cfg.grad_mode = grad_mode_from_name(j.at("grad").get<std::string>());
  return cfg;
}

}  // namespace bdi::detail

#endif  // BDI_SRC_JSON_UTIL_HPP
