#include "scenediff/checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "scenediff/common.hpp"

namespace scenediff {

using nlohmann::json;

void save_cbor(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::vector<std::uint8_t> bytes = json::to_cbor(j);
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "save_cbor: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  check(out.good(), "save_cbor: write failed for " + path.string());
}

json load_cbor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "load_cbor: cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return json::from_cbor(bytes);
}

json params_to_json(const nn::ParamStore& params) {
  json out = json::object();
  for (const auto& [name, tensor] : params.items()) {
    const Eigen::MatrixXd& v = tensor->value;
    json data = json::array();
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      for (Eigen::Index c = 0; c < v.cols(); ++c) data.push_back(v(r, c));
    out[name] = {{"rows", v.rows()}, {"cols", v.cols()}, {"data", std::move(data)}};
  }
  return out;
}

void params_from_json(const json& j, nn::ParamStore& params) {
  check(j.size() == params.items().size(),
        "params_from_json: parameter count mismatch (stored " + std::to_string(j.size()) +
            ", model " + std::to_string(params.items().size()) + ")");
  for (const auto& [name, entry] : j.items()) {
    check(params.has(name), "params_from_json: unexpected parameter " + name);
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const json& data = entry.at("data");
    check(static_cast<Eigen::Index>(data.size()) == rows * cols,
          "params_from_json: data size mismatch for " + name);
    Eigen::MatrixXd v(rows, cols);
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) v(r, c) = data[i++].get<double>();
    params.set_value(name, v);
  }
}

json schedule_to_json(const ddpm::NoiseSchedule& sched) {
  return {{"T", sched.T}, {"beta_start", sched.beta(0)}, {"beta_end", sched.beta(sched.T - 1)}};
}

ddpm::NoiseSchedule schedule_from_json(const json& j) {
  return ddpm::NoiseSchedule::linear(j.at("T").get<int>(), j.at("beta_start").get<double>(),
                                     j.at("beta_end").get<double>());
}

}  // namespace scenediff
