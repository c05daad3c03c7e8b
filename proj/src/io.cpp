#include "mixlab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mixlab {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() + "'");
  }
}

cd parse_w(const json& j) {
  if (j.is_number()) return cd(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cd(j[0].get<double>(), j[1].get<double>());
  throw std::invalid_argument("field: 'w' must be a number or [re, im]");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

EigenvectorField field_from_json(const json& spec) {
  check_keys(spec, {"kind", "dim", "kappa", "w", "scale", "normalize_norm_sq"}, "field");
  if (!spec.contains("kind") || !spec["kind"].is_string())
    throw std::invalid_argument("field: missing 'kind'");
  if (!spec.contains("dim") || !spec["dim"].is_number_integer() ||
      spec["dim"].get<long long>() < 0)
    throw std::invalid_argument("field: missing or negative 'dim'");
  const std::string kind = spec["kind"].get<std::string>();
  const std::size_t dim = spec["dim"].get<std::size_t>();

  EigenvectorField field;
  if (kind == "weighted_shift") {
    if (spec.contains("w")) throw std::invalid_argument("field: 'w' is not a weighted_shift key");
    if (!spec.contains("kappa")) throw std::invalid_argument("field: weighted_shift needs 'kappa'");
    field = make_weighted_shift_field(spec["kappa"].get<double>(), dim);
  } else if (kind == "analytic") {
    if (spec.contains("kappa")) throw std::invalid_argument("field: 'kappa' is not an analytic key");
    if (!spec.contains("w")) throw std::invalid_argument("field: analytic needs 'w'");
    field = make_analytic_field(parse_w(spec["w"]), dim);
  } else if (kind == "kalisch") {
    if (spec.contains("kappa") || spec.contains("w"))
      throw std::invalid_argument("field: kalisch takes only 'dim'");
    field = make_kalisch_field(dim);
  } else {
    throw std::invalid_argument("field: unknown kind '" + kind + "'");
  }

  if (spec.contains("scale") && spec.contains("normalize_norm_sq"))
    throw std::invalid_argument("field: 'scale' and 'normalize_norm_sq' are mutually exclusive");
  if (spec.contains("scale")) field = scale_field(field, spec["scale"].get<double>());
  if (spec.contains("normalize_norm_sq"))
    field = normalize_field(field, spec["normalize_norm_sq"].get<double>());
  return field;
}

json field_to_json(const EigenvectorField& field) {
  json j;
  if (field.family == "weighted_shift") {
    j["kind"] = "weighted_shift";
    j["kappa"] = field.kappa;
  } else if (field.family == "analytic") {
    j["kind"] = "analytic";
    j["w"] = json::array({field.w.real(), field.w.imag()});
  } else if (field.family == "kalisch") {
    j["kind"] = "kalisch";
  } else {
    throw std::invalid_argument("field_to_json: field has no construction metadata");
  }
  j["dim"] = field.dim;
  if (field.scale != 1.0) j["scale"] = field.scale;
  return j;
}

ChaosObservable observable_from_json(const json& spec, std::size_t dim) {
  check_keys(spec, {"degree0", "terms"}, "observable");
  double degree0 = 0.0;
  if (spec.contains("degree0")) degree0 = spec["degree0"].get<double>();
  std::vector<ChaosTerm> terms;
  if (spec.contains("terms")) {
    if (!spec["terms"].is_array())
      throw std::invalid_argument("observable: 'terms' must be an array");
    for (const json& t : spec["terms"]) {
      check_keys(t, {"indices", "coeff", "degree"}, "observable term");
      if (!t.contains("indices") || !t["indices"].is_array())
        throw std::invalid_argument("observable term: missing 'indices'");
      if (!t.contains("coeff")) throw std::invalid_argument("observable term: missing 'coeff'");
      ChaosTerm term;
      for (const json& idx : t["indices"]) term.monomial.indices.push_back(idx.get<int>());
      if (t.contains("degree") &&
          t["degree"].get<std::size_t>() != term.monomial.indices.size())
        throw std::invalid_argument("observable term: 'degree' disagrees with 'indices'");
      term.coeff = t["coeff"].get<double>();
      terms.push_back(std::move(term));
    }
  }
  return make_chaos_observable(dim, degree0, std::move(terms));
}

json observable_to_json(const ChaosObservable& f) {
  json j;
  j["degree0"] = f.degree0;
  j["terms"] = json::array();
  for (const ChaosTerm& term : f.terms) {
    json t;
    t["indices"] = term.monomial.indices;
    t["coeff"] = term.coeff;
    j["terms"].push_back(std::move(t));
  }
  return j;
}

Route route_from_name(const std::string& name) {
  if (name == "spectral") return Route::spectral;
  if (name == "direct") return Route::direct;
  if (name == "chaos") return Route::chaos;
  if (name == "mc") return Route::mc;
  if (name == "witness") return Route::witness;
  throw std::invalid_argument("unknown route '" + name + "'");
}

std::vector<long long> parse_order_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  const auto to_ll = [&](const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("order spec: bad integer '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("order spec: bad integer '" + s + "'");
    return v;
  };
  std::vector<long long> orders;
  if (parts.size() == 2) {
    const long long a = to_ll(parts[0]), b = to_ll(parts[1]);
    if (a < 0 || b < a) throw std::invalid_argument("order spec: need 0 <= a <= b");
    if (b - a > 100000) throw std::invalid_argument("order spec: range too large");
    for (long long n = a; n <= b; ++n) orders.push_back(n);
  } else if (parts.size() == 3 && parts[2] == "log") {
    const long long a = to_ll(parts[0]), b = to_ll(parts[1]);
    if (a < 1 || b < a) throw std::invalid_argument("order spec: need 1 <= a <= b");
    for (long long n = a; n <= b; n *= 2) orders.push_back(n);
  } else {
    throw std::invalid_argument("order spec: expected 'a:b' or 'a:b:log'");
  }
  return orders;
}

std::vector<long long> orders_from_json(const json& j) {
  std::vector<long long> orders;
  if (j.is_string()) {
    orders = parse_order_spec(j.get<std::string>());
  } else if (j.is_array()) {
    for (const json& v : j) {
      if (!v.is_number_integer()) throw std::invalid_argument("orders: expected integers");
      orders.push_back(v.get<long long>());
    }
  } else {
    throw std::invalid_argument("orders: expected a spec string or an array");
  }
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  if (orders.empty()) throw std::invalid_argument("orders: empty");
  if (orders.front() < 0) throw std::invalid_argument("orders: negative order");
  return orders;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"config_version", "field", "seed", "orders", "routes", "mc_samples", "quad_nodes",
              "observable_f", "observable_g"},
             "config");
  if (!j.contains("config_version") || !j["config_version"].is_number_integer())
    throw std::invalid_argument("config: missing 'config_version'");
  ExperimentConfig config;
  config.config_version = j["config_version"].get<int>();
  if (config.config_version != 1)
    throw std::invalid_argument("config: unsupported config_version");
  if (!j.contains("field")) throw std::invalid_argument("config: missing 'field'");
  config.field = j["field"];
  field_from_json(config.field);  // validate eagerly
  if (!j.contains("orders")) throw std::invalid_argument("config: missing 'orders'");
  config.orders = orders_from_json(j["orders"]);
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("routes")) {
    config.routes.clear();
    for (const json& r : j["routes"]) config.routes.push_back(route_from_name(r.get<std::string>()));
    if (config.routes.empty()) throw std::invalid_argument("config: empty 'routes'");
  }
  if (j.contains("mc_samples")) config.mc_samples = j["mc_samples"].get<std::size_t>();
  if (j.contains("quad_nodes")) config.quad_nodes = j["quad_nodes"].get<std::size_t>();
  if (j.contains("observable_f")) config.observable_f = j["observable_f"];
  if (j.contains("observable_g")) config.observable_g = j["observable_g"];
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["config_version"] = config.config_version;
  j["field"] = config.field;
  j["seed"] = config.seed;
  j["orders"] = config.orders;
  json routes = json::array();
  for (Route r : config.routes) routes.push_back(route_name(r));
  j["routes"] = routes;
  j["mc_samples"] = config.mc_samples;
  j["quad_nodes"] = config.quad_nodes;
  if (!config.observable_f.is_null()) j["observable_f"] = config.observable_f;
  if (!config.observable_g.is_null()) j["observable_g"] = config.observable_g;
  return j;
}

std::string format_complex(cd v) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", v.real(), v.imag());
  return buf;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "n,value,stderr,route\n";
  for (const ResultRow& row : rows) {
    out << row.n << ',' << format_complex(row.value) << ',' << format_double(row.stderr_) << ','
        << route_name(row.route) << '\n';
  }
}

json results_to_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows) {
  json j;
  j["config"] = config_to_json(config);
  json out = json::array();
  for (const ResultRow& row : rows) {
    json r;
    r["n"] = row.n;
    r["value_re"] = row.value.real();
    r["value_im"] = row.value.imag();
    r["stderr"] = row.stderr_;
    r["route"] = route_name(row.route);
    out.push_back(std::move(r));
  }
  j["rows"] = std::move(out);
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

}  // namespace mixlab
