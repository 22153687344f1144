#include "run_config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "json.hpp"
#include "vlmp/error.hpp"

namespace vlmp::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

void check(bool ok, const std::string& key, const std::string& range) {
  if (!ok) config_error("config key '" + key + "' must be " + range);
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) config_error("config key '" + key + "' must be a number");
  return v.get<double>();
}

long long as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) config_error("config key '" + key + "' must be an integer");
  return v.get<long long>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) config_error("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> as_doubles(const json& v, const std::string& key) {
  if (!v.is_array()) config_error("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_double(e, key));
  return out;
}

using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed",
       [](RunConfig& c, const json& v, const std::string& k) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
           config_error("config key '" + k + "' must be a non-negative integer");
         }
         c.seed = v.get<std::uint64_t>();
       }},
      {"num_components", [](RunConfig& c, const json& v, const std::string& k) { c.num_components = static_cast<int>(as_int(v, k)); }},
      {"em_max_iter", [](RunConfig& c, const json& v, const std::string& k) { c.em_max_iter = static_cast<int>(as_int(v, k)); }},
      {"cov_floor", [](RunConfig& c, const json& v, const std::string& k) { c.cov_floor = as_double(v, k); }},
      {"tpgmm_cov_floor", [](RunConfig& c, const json& v, const std::string& k) { c.tpgmm_cov_floor = as_double(v, k); }},
      {"n_reference",
       [](RunConfig& c, const json& v, const std::string& k) {
         const long long n = as_int(v, k);
         check(n >= 2 && n <= 10000, k, "in [2, 10000]");
         c.n_reference = static_cast<std::size_t>(n);
       }},
      {"tune_kernel", [](RunConfig& c, const json& v, const std::string& k) { c.tune_kernel = as_bool(v, k); }},
      {"kernel_lengthscales", [](RunConfig& c, const json& v, const std::string& k) { c.kernel_lengthscales = as_doubles(v, k); }},
      {"kernel_variances", [](RunConfig& c, const json& v, const std::string& k) { c.kernel_variances = as_doubles(v, k); }},
      {"kernel_lengthscale", [](RunConfig& c, const json& v, const std::string& k) { c.kernel_lengthscale = as_double(v, k); }},
      {"kernel_variance", [](RunConfig& c, const json& v, const std::string& k) { c.kernel_variance = as_double(v, k); }},
      {"lambda_mean", [](RunConfig& c, const json& v, const std::string& k) { c.lambda_mean = as_double(v, k); }},
      {"lambda_cov", [](RunConfig& c, const json& v, const std::string& k) { c.lambda_cov = as_double(v, k); }},
      {"epsilon", [](RunConfig& c, const json& v, const std::string& k) { c.epsilon = as_double(v, k); }},
      {"resample_count", [](RunConfig& c, const json& v, const std::string& k) { c.resample_count = static_cast<int>(as_int(v, k)); }},
      {"window", [](RunConfig& c, const json& v, const std::string& k) { c.window = as_double(v, k); }},
      {"num_frames", [](RunConfig& c, const json& v, const std::string& k) { c.num_frames = static_cast<int>(as_int(v, k)); }},
      {"anchors_in_all_frames", [](RunConfig& c, const json& v, const std::string& k) { c.anchors_in_all_frames = as_bool(v, k); }},
      {"orientation_iterations",
       [](RunConfig& c, const json& v, const std::string& k) { c.orientation_iterations = static_cast<int>(as_int(v, k)); }},
      {"angle_step_deg", [](RunConfig& c, const json& v, const std::string& k) { c.angle_step_deg = as_double(v, k); }},
      {"w_rot", [](RunConfig& c, const json& v, const std::string& k) { c.w_rot = as_double(v, k); }},
      {"n_pos_samples", [](RunConfig& c, const json& v, const std::string& k) { c.n_pos_samples = static_cast<int>(as_int(v, k)); }},
      {"trials", [](RunConfig& c, const json& v, const std::string& k) { c.trials = static_cast<int>(as_int(v, k)); }},
      {"translation_scale", [](RunConfig& c, const json& v, const std::string& k) { c.translation_scale = as_double(v, k); }},
      {"rotation_scale", [](RunConfig& c, const json& v, const std::string& k) { c.rotation_scale = as_double(v, k); }},
      {"n_points",
       [](RunConfig& c, const json& v, const std::string& k) {
         const long long n = as_int(v, k);
         check(n >= 3 && n <= 100000, k, "in [3, 100000]");
         c.n_points = static_cast<std::size_t>(n);
       }},
      {"output_dir",
       [](RunConfig& c, const json& v, const std::string& k) {
         if (!v.is_string()) config_error("config key '" + k + "' must be a string");
         c.output_dir = v.get<std::string>();
       }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  check(num_components >= 1 && num_components <= 50, "num_components", "in [1, 50]");
  check(em_max_iter >= 1 && em_max_iter <= 100000, "em_max_iter", "in [1, 100000]");
  check(cov_floor > 0.0 && cov_floor < 1.0, "cov_floor", "in (0, 1)");
  check(tpgmm_cov_floor > 0.0 && tpgmm_cov_floor < 1.0, "tpgmm_cov_floor", "in (0, 1)");
  check(n_reference >= 2 && n_reference <= 10000, "n_reference", "in [2, 10000]");
  check(!kernel_lengthscales.empty(), "kernel_lengthscales", "non-empty");
  for (double l : kernel_lengthscales) check(l > 0.0 && l <= 10.0, "kernel_lengthscales", "in (0, 10]");
  check(!kernel_variances.empty(), "kernel_variances", "non-empty");
  for (double v : kernel_variances) check(v > 0.0 && std::isfinite(v), "kernel_variances", "positive");
  check(kernel_lengthscale > 0.0 && kernel_lengthscale <= 10.0, "kernel_lengthscale", "in (0, 10]");
  check(kernel_variance > 0.0 && std::isfinite(kernel_variance), "kernel_variance", "positive");
  check(lambda_mean > 0.0 && std::isfinite(lambda_mean), "lambda_mean", "positive");
  check(lambda_cov > 0.0 && std::isfinite(lambda_cov), "lambda_cov", "positive");
  check(epsilon > 0.0 && epsilon <= 1e-2, "epsilon", "in (0, 1e-2]");
  check(resample_count >= 0 && resample_count <= 100, "resample_count", "in [0, 100]");
  check(window > 0.0 && window <= 0.2, "window", "in (0, 0.2]");
  check(num_frames == 1 || num_frames == 2, "num_frames", "1 or 2");
  check(orientation_iterations >= 1 && orientation_iterations <= 100, "orientation_iterations", "in [1, 100]");
  check(angle_step_deg > 0.0 && angle_step_deg <= 90.0, "angle_step_deg", "in (0, 90]");
  check(w_rot >= 0.0 && std::isfinite(w_rot), "w_rot", "non-negative");
  check(n_pos_samples >= 1 && n_pos_samples <= 10000, "n_pos_samples", "in [1, 10000]");
  check(trials >= 1 && trials <= 1000, "trials", "in [1, 1000]");
  check(translation_scale >= 0.0 && translation_scale <= 2.0, "translation_scale", "in [0, 2]");
  check(rotation_scale >= 0.0 && rotation_scale <= std::numbers::pi, "rotation_scale", "in [0, pi]");
  check(n_points >= 3 && n_points <= 100000, "n_points", "in [3, 100000]");
}

LfeKmpConfig RunConfig::lfekmp() const {
  LfeKmpConfig c;
  c.num_components = num_components;
  c.seed = seed;
  c.em_max_iter = em_max_iter;
  c.cov_floor = cov_floor;
  c.n_reference = n_reference;
  c.tune_kernel = tune_kernel;
  c.kernel = {kernel_lengthscale, kernel_variance};
  c.kernel_grid = {kernel_lengthscales, kernel_variances};
  c.lambda_mean = lambda_mean;
  c.lambda_cov = lambda_cov;
  c.epsilon = epsilon;
  c.resample_count = resample_count;
  c.window = window;
  c.anchors_in_all_frames = anchors_in_all_frames;
  c.orientation_iterations = orientation_iterations;
  return c;
}

TpGmmOptions RunConfig::tpgmm() const {
  TpGmmOptions o;
  o.num_components = num_components;
  o.seed = seed;
  o.max_iter = em_max_iter;
  o.cov_floor = tpgmm_cov_floor;
  return o;
}

EndposeOptions RunConfig::endpose() const {
  EndposeOptions o;
  o.seed = seed;
  o.n_pos_samples = n_pos_samples;
  o.angle_step = angle_step_deg * std::numbers::pi / 180.0;
  o.w_rot = w_rot;
  return o;
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  RunConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) config_error("unknown config key '" + key + "'");
    it->second(c, value, key);
  }
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json j{{"seed", c.seed},
         {"num_components", c.num_components},
         {"em_max_iter", c.em_max_iter},
         {"cov_floor", c.cov_floor},
         {"tpgmm_cov_floor", c.tpgmm_cov_floor},
         {"n_reference", c.n_reference},
         {"tune_kernel", c.tune_kernel},
         {"kernel_lengthscales", c.kernel_lengthscales},
         {"kernel_variances", c.kernel_variances},
         {"kernel_lengthscale", c.kernel_lengthscale},
         {"kernel_variance", c.kernel_variance},
         {"lambda_mean", c.lambda_mean},
         {"lambda_cov", c.lambda_cov},
         {"epsilon", c.epsilon},
         {"resample_count", c.resample_count},
         {"window", c.window},
         {"num_frames", c.num_frames},
         {"anchors_in_all_frames", c.anchors_in_all_frames},
         {"orientation_iterations", c.orientation_iterations},
         {"angle_step_deg", c.angle_step_deg},
         {"w_rot", c.w_rot},
         {"n_pos_samples", c.n_pos_samples},
         {"trials", c.trials},
         {"translation_scale", c.translation_scale},
         {"rotation_scale", c.rotation_scale},
         {"n_points", c.n_points},
         {"output_dir", c.output_dir}};
  return j.dump(2) + "\n";
}

}  // namespace vlmp::cli
