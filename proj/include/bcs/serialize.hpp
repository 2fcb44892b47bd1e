#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcs/kernel.hpp"
#include "bcs/partition.hpp"
#include "bcs/scalar.hpp"
#include "bcs/sensing.hpp"
#include "bcs/signals.hpp"
#include "bcs/tensor.hpp"

namespace bcs {

using json = nlohmann::json;

/// Bad or missing configuration/input files. The CLI maps this to exit 2,
/// runtime failures to exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return j;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// ---- tensors: {"dims": [...], "data": [...]} , complex entries [re, im] ----

template <Scalar T>
json tensor_to_json(const Tensor<T>& x) {
  json dims = json::array();
  for (int l = 0; l < x.order(); ++l) dims.push_back(x.shape().dim(l));
  json data = json::array();
  for (std::int64_t i = 0; i < x.size(); ++i) {
    if constexpr (is_complex_v<T>) {
      data.push_back(json::array({x[i].real(), x[i].imag()}));
    } else {
      data.push_back(x[i]);
    }
  }
  return json{{"dims", dims}, {"data", data}};
}

template <Scalar T>
Tensor<T> tensor_from_json(const json& j) {
  if (!j.contains("dims") || !j.contains("data")) {
    throw ConfigError("tensor json: missing dims/data");
  }
  std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  const json& data = j.at("data");
  std::vector<T> values;
  values.reserve(data.size());
  for (const json& e : data) {
    if constexpr (is_complex_v<T>) {
      if (!e.is_array() || e.size() != 2) {
        throw ConfigError("tensor json: complex entry must be [re, im]");
      }
      values.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      if (!e.is_number()) {
        throw ConfigError("tensor json: expected real entry");
      }
      values.push_back(e.get<double>());
    }
  }
  try {
    return Tensor<T>(Shape(dims), std::move(values));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("tensor json: ") + e.what());
  }
}

// ---- kernel: {"order": d, "values": [...]} row-major ----

inline json kernel_to_json(const CorrelationKernel& k) {
  json values = json::array();
  for (std::int64_t i = 0; i < k.values.size(); ++i) {
    values.push_back(k.values[i]);
  }
  return json{{"order", k.order()}, {"values", values}};
}

inline CorrelationKernel kernel_from_json(const json& j) {
  if (!j.contains("order") || !j.contains("values")) {
    throw ConfigError("kernel json: missing order/values");
  }
  const int d = j.at("order").get<int>();
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  try {
    return CorrelationKernel(Tensor<double>(kernel_shape(d), std::move(values)));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("kernel json: ") + e.what());
  }
}

// ---- sensor header: matrices re-derived from the seed, never stored ----

template <Scalar T>
json sensor_to_json(const BlockSensor<T>& s) {
  return json{{"m", s.m()},
              {"n", s.n()},
              {"beta", s.num_blocks()},
              {"ensemble", s.ensemble()},
              {"seed", s.seed()}};
}

template <Scalar T>
BlockSensor<T> sensor_from_json(const json& j) {
  try {
    return draw_sensor<T>(j.at("m").get<int>(), j.at("n").get<std::int64_t>(),
                          j.at("beta").get<int>(),
                          j.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sensor json: ") + e.what());
  }
}

// ---- partition spec: {"dims", "factors", "strategy"} ----

inline json partition_spec_to_json(const PartitionSpec& spec) {
  json dims = json::array();
  for (int l = 0; l < spec.shape.order(); ++l) dims.push_back(spec.shape.dim(l));
  return json{{"dims", dims},
              {"factors", spec.factors},
              {"strategy",
               spec.kind == PartitionKind::kComb ? "comb" : "contiguous"}};
}

inline PartitionKind partition_kind_from_string(const std::string& s) {
  if (s == "comb") return PartitionKind::kComb;
  if (s == "contiguous") return PartitionKind::kContiguous;
  throw ConfigError("unknown partition strategy: " + s);
}

inline PartitionSpec partition_spec_from_json(const json& j) {
  try {
    return PartitionSpec(Shape(j.at("dims").get<std::vector<int>>()),
                         j.at("factors").get<std::vector<int>>(),
                         partition_kind_from_string(
                             j.at("strategy").get<std::string>()));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("partition json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("partition json: ") + e.what());
  }
}

// ---- cluster spec ----

inline json cluster_spec_to_json(const ClusterSpec& spec) {
  json dims = json::array();
  for (int l = 0; l < spec.shape.order(); ++l) dims.push_back(spec.shape.dim(l));
  return json{{"dims", dims},
              {"num_clusters", spec.num_clusters},
              {"cluster_radius", spec.cluster_radius},
              {"sparsity", spec.sparsity},
              {"amplitude", to_string(spec.amplitude)},
              {"seed", spec.seed}};
}

inline ClusterSpec cluster_spec_from_json(const json& j) {
  try {
    ClusterSpec spec{Shape(j.at("dims").get<std::vector<int>>())};
    spec.num_clusters = j.at("num_clusters").get<int>();
    spec.cluster_radius = j.at("cluster_radius").get<int>();
    spec.sparsity = j.at("sparsity").get<int>();
    spec.amplitude = amplitude_from_string(j.at("amplitude").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cluster spec json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cluster spec json: ") + e.what());
  }
}

}  // namespace bcs
