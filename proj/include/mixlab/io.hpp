#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "mixlab/correlate.hpp"

namespace mixlab {

using json = nlohmann::json;

// Field specs: {"kind": "weighted_shift", "kappa": 1.0, "dim": 1024},
// {"kind": "analytic", "w": [2.0, 0.0], "dim": 256}, {"kind": "kalisch",
// "dim": 129}; optional "scale" (exact pointwise factor) or
// "normalize_norm_sq" (target for ||E||_2^2 including the tail), not both.
EigenvectorField field_from_json(const json& spec);
// Inverse of the above; fields without construction metadata cannot be
// serialized and throw.
json field_to_json(const EigenvectorField& field);

// {"degree0": 0.0, "terms": [{"indices": [1, -2], "coeff": 0.5}, ...]}.
ChaosObservable observable_from_json(const json& spec, std::size_t dim);
json observable_to_json(const ChaosObservable& f);

Route route_from_name(const std::string& name);

// "a:b" (all integers), "a:b:log" (doubling from a, capped at b), or a JSON
// array of integers; always returned sorted and deduplicated.
std::vector<long long> parse_order_spec(const std::string& spec);
std::vector<long long> orders_from_json(const json& j);

struct ExperimentConfig {
  int config_version = 1;
  json field;
  std::uint64_t seed = 1;
  std::vector<long long> orders;
  std::vector<Route> routes = {Route::direct};
  std::size_t mc_samples = 100000;
  std::size_t quad_nodes = 0;  // 0 picks the exactness minimum
  json observable_f;           // null = norm-squared observable
  json observable_g;
};

// Strict parse: unknown keys and version mismatches are errors, so stale
// configs fail loudly instead of running with defaults.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& config);

struct ResultRow {
  long long n = 0;
  cd value{};
  double stderr_ = 0.0;  // 0 for exact routes
  Route route = Route::spectral;
};

// One complex number per field, fixed "re+imi" layout, %.17g everywhere:
// output is byte-stable across runs and worker counts.
std::string format_complex(cd v);
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

json results_to_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);
void save_text_file(const std::string& path, const std::string& text);

}  // namespace mixlab
