#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/data.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/reference.hpp"
#include "kexpfam/rkhs.hpp"
#include "kexpfam/sampler.hpp"
#include "kexpfam/score_matching.hpp"
#include "kexpfam/trainer.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace kexpfam {

using Json = nlohmann::json;

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Vec vec_from_json(const Json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

inline Mat mat_from_json(const Json& rows, int cols_hint = 0) {
  if (rows.empty()) return Mat(0, cols_hint);
  Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j].get<double>();
  return m;
}

inline Json kernel_to_json(const ProductKernel& kernel) {
  if (kernel.blocks.size() == 1) {
    return Json{{"bandwidth_sq", kernel.blocks[0].bandwidth_sq},
                {"input_dim", kernel.blocks[0].input_dim}};
  }
  Json blocks = Json::array();
  for (const auto& b : kernel.blocks)
    blocks.push_back(Json{{"bandwidth_sq", b.bandwidth_sq},
                          {"input_dim", b.input_dim}});
  return Json{{"product", blocks}};
}

inline ProductKernel kernel_from_json(const Json& j) {
  if (j.contains("product")) {
    std::vector<KernelSpec> blocks;
    for (const auto& b : j.at("product"))
      blocks.emplace_back(b.at("bandwidth_sq").get<double>(),
                          b.at("input_dim").get<int>());
    return ProductKernel(std::move(blocks));
  }
  return ProductKernel(KernelSpec(j.at("bandwidth_sq").get<double>(),
                                  j.at("input_dim").get<int>()));
}

inline Json feature_map_to_json(const RandomFeatureMap& map) {
  return Json{{"frequencies", to_json(map.frequencies)},
              {"phases", to_json(map.phases)},
              {"scale", map.scale},
              {"seed", map.seed}};
}

inline RandomFeatureMap feature_map_from_json(const Json& j) {
  RandomFeatureMap map;
  map.frequencies = mat_from_json(j.at("frequencies"));
  map.phases = vec_from_json(j.at("phases"));
  map.scale = j.at("scale").get<double>();
  map.seed = j.at("seed").get<uint64_t>();
  return map;
}

inline Json rkhs_to_json(const RkhsFunction& fn) {
  Json j;
  j["kernel"] = kernel_to_json(fn.kernel());
  if (fn.backend() == RkhsBackend::expansion) {
    j["backend"] = "expansion";
    j["support_points"] = to_json(fn.support_points());
    j["coefficients"] = to_json(fn.coefficients());
  } else {
    j["backend"] = "random_feature";
    j["feature_map"] = feature_map_to_json(fn.feature_map());
    j["beta"] = to_json(fn.beta());
  }
  return j;
}

inline RkhsFunction rkhs_from_json(const Json& j) {
  ProductKernel kernel = kernel_from_json(j.at("kernel"));
  if (j.at("backend").get<std::string>() == "expansion") {
    RkhsFunction fn = RkhsFunction::expansion(kernel);
    Mat pts = mat_from_json(j.at("support_points"), kernel.input_dim());
    Vec coefs = vec_from_json(j.at("coefficients"));
    if (pts.rows() > 0) fn.add_point_masses(pts, coefs);
    return fn;
  }
  return RkhsFunction::random_feature_with_beta(
      kernel, feature_map_from_json(j.at("feature_map")),
      vec_from_json(j.at("beta")));
}

inline Json sampler_to_json(const TransportSampler& sampler) {
  Json layers = Json::array();
  for (const auto& layer : sampler.layers())
    layers.push_back(Json{{"weights", to_json(layer.weight)},
                          {"bias", to_json(layer.bias)},
                          {"activation", activation_name(layer.activation)}});
  return Json{{"layers", layers},
              {"noise_dim", sampler.noise_dim()},
              {"output_dim", sampler.output_dim()}};
}

inline TransportSampler sampler_from_json(const Json& j, uint64_t noise_seed) {
  std::vector<TransportSampler::Layer> layers;
  for (const auto& lj : j.at("layers")) {
    TransportSampler::Layer layer;
    layer.weight = mat_from_json(lj.at("weights"));
    layer.bias = vec_from_json(lj.at("bias"));
    layer.activation = activation_from_name(lj.at("activation").get<std::string>());
    layers.push_back(std::move(layer));
  }
  return TransportSampler::from_layers(std::move(layers),
                                       j.at("noise_dim").get<int>(), noise_seed);
}

inline Json reference_to_json(const ReferenceMeasure& base) {
  return Json{{"mean", to_json(base.mean)},
              {"base_variance", to_json(base.base_variance)},
              {"inflation", base.inflation}};
}

inline ReferenceMeasure reference_from_json(const Json& j) {
  ReferenceMeasure base;
  base.mean = vec_from_json(j.at("mean"));
  base.base_variance = vec_from_json(j.at("base_variance"));
  base.inflation = j.at("inflation").get<double>();
  return base;
}

inline Json config_to_json(const TrainConfig& cfg) {
  return Json{{"lambda", cfg.lambda},
              {"eta", cfg.eta},
              {"inner_iters", cfg.inner_iters},
              {"outer_iters", cfg.outer_iters},
              {"batch", cfg.batch},
              {"tau0", cfg.tau0},
              {"k0", cfg.k0},
              {"rho0", cfg.rho0},
              {"l0", cfg.l0},
              {"sampler_updates_per_f", cfg.sampler_updates_per_f},
              {"nu_updates_per_sampler", cfg.nu_updates_per_sampler},
              {"clip_norm", cfg.clip_norm},
              {"nu_shrink", cfg.nu_shrink},
              {"max_expansion_terms", cfg.max_expansion_terms},
              {"seed", cfg.seed},
              {"backend", cfg.backend == RkhsBackend::expansion
                              ? "expansion"
                              : "random_feature"},
              {"feature_count", cfg.feature_count},
              {"hidden_dim", cfg.hidden_dim},
              {"depth", cfg.depth},
              {"noise_dim", cfg.noise_dim},
              {"inflation", cfg.inflation},
              {"normalize", cfg.normalize},
              {"cold_start", cfg.cold_start},
              {"init_sampler_to_base", cfg.init_sampler_to_base},
              {"full_data_side", cfg.full_data_side},
              {"rho_schedule", cfg.rho_schedule},
              {"curve_every", cfg.curve_every},
              {"curve_mc", cfg.curve_mc}};
}

inline TrainConfig config_from_json(const Json& j) {
  TrainConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("lambda", cfg.lambda);
  get("eta", cfg.eta);
  get("inner_iters", cfg.inner_iters);
  get("outer_iters", cfg.outer_iters);
  get("batch", cfg.batch);
  get("tau0", cfg.tau0);
  get("k0", cfg.k0);
  get("rho0", cfg.rho0);
  get("l0", cfg.l0);
  get("sampler_updates_per_f", cfg.sampler_updates_per_f);
  get("nu_updates_per_sampler", cfg.nu_updates_per_sampler);
  get("clip_norm", cfg.clip_norm);
  get("nu_shrink", cfg.nu_shrink);
  get("max_expansion_terms", cfg.max_expansion_terms);
  get("seed", cfg.seed);
  if (j.contains("backend"))
    cfg.backend = j.at("backend").get<std::string>() == "random_feature"
                      ? RkhsBackend::random_feature
                      : RkhsBackend::expansion;
  get("feature_count", cfg.feature_count);
  get("hidden_dim", cfg.hidden_dim);
  get("depth", cfg.depth);
  get("noise_dim", cfg.noise_dim);
  get("inflation", cfg.inflation);
  get("normalize", cfg.normalize);
  get("cold_start", cfg.cold_start);
  get("init_sampler_to_base", cfg.init_sampler_to_base);
  get("full_data_side", cfg.full_data_side);
  get("rho_schedule", cfg.rho_schedule);
  get("curve_every", cfg.curve_every);
  get("curve_mc", cfg.curve_mc);
  return cfg;
}

inline Json normalization_to_json(const Normalization& norm) {
  return Json{{"mean", to_json(norm.mean)}, {"scale", to_json(norm.scale)}};
}

inline Normalization normalization_from_json(const Json& j) {
  Normalization norm;
  norm.mean = vec_from_json(j.at("mean"));
  norm.scale = vec_from_json(j.at("scale"));
  return norm;
}

inline Json model_to_json(const TrainedModel& model) {
  Json j;
  j["format"] = "kexpfam-model";
  j["version"] = 1;
  j["mode"] = model.mode == TrainMode::unconditional ? "unconditional"
                                                     : "conditional";
  j["kernel"] = kernel_to_json(model.f.kernel());
  j["f"] = rkhs_to_json(model.f);
  j["nu"] = rkhs_to_json(model.nu);
  j["sampler"] = sampler_to_json(model.sampler);
  j["base"] = reference_to_json(model.base);
  j["config"] = config_to_json(model.config);
  j["normalization"] =
      model.normalization ? normalization_to_json(*model.normalization) : Json();
  j["x_cols"] = model.x_cols;
  j["y_cols"] = model.y_cols;
  j["stats"] = Json{{"inner_refreshes", model.stats.inner_refreshes},
                    {"inner_iterations", model.stats.inner_iterations},
                    {"sampler_updates", model.stats.sampler_updates},
                    {"nu_refinements", model.stats.nu_refinements},
                    {"peak_f_terms", model.stats.peak_f_terms},
                    {"peak_nu_terms", model.stats.peak_nu_terms},
                    {"peak_expansion_doubles", model.stats.peak_expansion_doubles}};
  return j;
}

inline TrainedModel model_from_json(const Json& j) {
  require(j.value("format", "") == "kexpfam-model", "not a kexpfam model file");
  TrainedModel model;
  model.mode = j.at("mode").get<std::string>() == "conditional"
                   ? TrainMode::conditional
                   : TrainMode::unconditional;
  model.f = rkhs_from_json(j.at("f"));
  model.nu = rkhs_from_json(j.at("nu"));
  model.config = config_from_json(j.at("config"));
  model.sampler = sampler_from_json(j.at("sampler"),
                                    derive_seed(model.config.seed, "noise"));
  model.base = reference_from_json(j.at("base"));
  if (!j.at("normalization").is_null())
    model.normalization = normalization_from_json(j.at("normalization"));
  model.x_cols = j.value("x_cols", std::vector<int>{});
  model.y_cols = j.value("y_cols", std::vector<int>{});
  if (j.contains("stats")) {
    const Json& s = j.at("stats");
    model.stats.inner_refreshes = s.value("inner_refreshes", 0L);
    model.stats.inner_iterations = s.value("inner_iterations", 0L);
    model.stats.sampler_updates = s.value("sampler_updates", 0L);
    model.stats.nu_refinements = s.value("nu_refinements", 0L);
    model.stats.peak_f_terms = s.value("peak_f_terms", 0L);
    model.stats.peak_nu_terms = s.value("peak_nu_terms", 0L);
    model.stats.peak_expansion_doubles = s.value("peak_expansion_doubles", 0L);
  }
  return model;
}

inline Json score_model_to_json(const ScoreMatchingModel& model) {
  return Json{{"format", "kexpfam-score-model"},
              {"version", 1},
              {"support", to_json(model.support)},
              {"coefficients", to_json(model.coefficients)},
              {"kernel", Json{{"bandwidth_sq", model.kernel.bandwidth_sq},
                              {"input_dim", model.kernel.input_dim}}},
              {"lambda", model.lambda},
              {"eta", model.eta},
              {"base", reference_to_json(model.base)},
              {"gram_entries", model.gram_entries}};
}

inline ScoreMatchingModel score_model_from_json(const Json& j) {
  require(j.value("format", "") == "kexpfam-score-model",
          "not a kexpfam score-model file");
  ScoreMatchingModel model;
  model.support = mat_from_json(j.at("support"));
  model.coefficients = vec_from_json(j.at("coefficients"));
  model.kernel = KernelSpec(j.at("kernel").at("bandwidth_sq").get<double>(),
                            j.at("kernel").at("input_dim").get<int>());
  model.lambda = j.at("lambda").get<double>();
  model.eta = j.at("eta").get<double>();
  model.base = reference_from_json(j.at("base"));
  model.gram_entries = j.value("gram_entries", 0L);
  return model;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ResourceError("write_json_file: cannot open " + path);
  out << j.dump(2) << '\n';
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("read_json_file: cannot open " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace kexpfam
