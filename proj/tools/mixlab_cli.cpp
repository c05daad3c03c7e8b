// Command line front end: field-info (inspect a field spec), correlate
// (correlation decay tables), verify (self-checking invariant suites).
// Exit codes: 0 success, 1 a numeric check failed, 2 bad usage or config.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mixlab/io.hpp"
#include "mixlab/measure.hpp"
#include "mixlab/parallel.hpp"

namespace {

using namespace mixlab;

// ---------------------------------------------------------------- field-info

json field_report(const json& spec) {
  const EigenvectorField field = field_from_json(spec);
  json out;
  out["spec"] = field_to_json(field);
  out["dim"] = field.dim;
  const double truncated = field_norm_sq(field);
  out["norm_sq_truncated"] = truncated;
  if (std::isfinite(field.tail_sq_bound)) {
    out["tail_sq_bound"] = field.tail_sq_bound;
    out["norm_sq_total"] = truncated + field.tail_sq_bound;
  }
  const CovarianceModel cov = sigma_from_field(field);
  json sigma_head = json::array();
  for (std::size_t k = 0; k < std::min<std::size_t>(8, cov.sigma.size()); ++k)
    sigma_head.push_back(cov.sigma[k]);
  out["sigma_head"] = sigma_head;
  if (field.holder_alpha) out["declared_alpha"] = *field.holder_alpha;
  const HolderEstimate est = holder_estimate(field);
  out["fit_alpha"] = est.alpha_hat;
  out["fit_constant"] = est.c_hat;
  out["fit_r_squared"] = est.r_squared;
  const OperatorModel op = make_operator(field);
  json residuals = json::array();
  for (double theta : {0.5, 1.0, 2.0}) {
    json r;
    r["theta"] = theta;
    r["residual"] = eigen_residual(field, op, theta);
    residuals.push_back(std::move(r));
  }
  out["eigen_residuals"] = residuals;
  return out;
}

int cmd_field_info(const std::string& config_path, const std::string& out_path) {
  json j = load_json_file(config_path);
  if (j.contains("field")) j = j["field"];
  const json report = field_report(j);
  if (out_path.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    save_json_file(out_path, report);
  }
  return 0;
}

// ----------------------------------------------------------------- correlate

struct BuiltObservables {
  bool chaos = false;
  ChaosObservable f;
  ChaosObservable g;
};

BuiltObservables build_observables(const ExperimentConfig& config, std::size_t dim) {
  BuiltObservables built;
  if (config.observable_f.is_null() && config.observable_g.is_null()) return built;
  built.chaos = true;
  const json& f_spec = config.observable_f.is_null() ? config.observable_g : config.observable_f;
  const json& g_spec = config.observable_g.is_null() ? config.observable_f : config.observable_g;
  built.f = observable_from_json(f_spec, dim);
  built.g = observable_from_json(g_spec, dim);
  return built;
}

std::vector<ResultRow> run_correlate(const ExperimentConfig& config) {
  const EigenvectorField field = field_from_json(config.field);
  const OperatorModel op = make_operator(field);
  const CovarianceModel cov = sigma_from_field(field);
  const BuiltObservables obs = build_observables(config, field.dim);

  std::vector<ResultRow> rows;
  for (long long n : config.orders) {
    for (Route route : config.routes) {
      ResultRow row;
      row.n = n;
      row.route = route;
      switch (route) {
        case Route::direct:
          if (obs.chaos)
            throw std::invalid_argument(
                "route 'direct' is the exact norm-squared route; drop the observables or use "
                "'chaos'");
          row.value = cd(norm_sq_correlation(op, cov, n), 0.0);
          break;
        case Route::chaos:
          if (!obs.chaos)
            throw std::invalid_argument("route 'chaos' needs observable_f / observable_g");
          row.value = cd(chaos_corr(obs.f, obs.g, op, cov, n), 0.0);
          break;
        case Route::mc: {
          McOptions mc;
          mc.n_streams = 64;
          Observable fe, ge;
          if (obs.chaos) {
            const ChaosObservable& f = obs.f;
            const ChaosObservable& g = obs.g;
            fe = [&f, &cov](const cvec& z) { return observable_eval(f, z, cov); };
            ge = [&g, &cov](const cvec& z) { return observable_eval(g, z, cov); };
            mc.mean_f = f.degree0;
            mc.mean_g = g.degree0;
          } else {
            fe = [](const cvec& z) { return norm_sq(z); };
            ge = fe;
            const double mean = 2.0 * sum_sigma_sq(cov);
            mc.mean_f = mean;
            mc.mean_g = mean;
          }
          const McEstimate est =
              corr_mc(op, cov, fe, ge, n, config.mc_samples, config.seed, mc);
          row.value = cd(est.value, 0.0);
          row.stderr_ = est.stderr_;
          break;
        }
        case Route::spectral:
        case Route::witness:
          throw std::invalid_argument(
              std::string("route '") + route_name(route) +
              "' takes library-level inputs; the command line offers direct, chaos, mc");
      }
      rows.push_back(row);
    }
  }
  return rows;
}

int cmd_correlate(const std::string& config_path, const std::string& out_path,
                  const std::string& json_path, const std::string& orders_flag,
                  const std::string& routes_flag, std::uint64_t seed_flag, bool seed_given) {
  json j = load_json_file(config_path);
  // Flags fill gaps; an explicit config key wins.  The seed is the exception:
  // a --seed flag always wins so one config can drive many runs.
  if (!j.contains("orders") && !orders_flag.empty()) j["orders"] = orders_flag;
  if (!j.contains("routes") && !routes_flag.empty()) {
    json routes = json::array();
    std::stringstream ss(routes_flag);
    std::string name;
    while (std::getline(ss, name, ',')) routes.push_back(name);
    j["routes"] = routes;
  }
  if (!j.contains("routes")) {
    const bool chaos = j.contains("observable_f") || j.contains("observable_g");
    j["routes"] = chaos ? json::array({"chaos", "mc"}) : json::array({"direct", "mc"});
  }
  if (seed_given) j["seed"] = seed_flag;

  const ExperimentConfig config = config_from_json(j);
  const std::vector<ResultRow> rows = run_correlate(config);

  std::ostringstream csv;
  write_csv(csv, rows);
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    save_text_file(out_path, csv.str());
  }
  if (!json_path.empty()) save_json_file(json_path, results_to_json(config, rows));
  return 0;
}

// -------------------------------------------------------------------- verify

struct SuiteResult {
  std::string name;
  bool ok = true;
  std::string detail;
};

void report(std::vector<SuiteResult>& results, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "ok" : "FAIL", name.c_str(), detail.c_str());
  results.push_back(SuiteResult{name, ok, detail});
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void suite_route_agreement(std::vector<SuiteResult>& results) {
  const EigenvectorField field = make_weighted_shift_field(1.0, 96);
  const OperatorModel op = make_operator(field);
  const CovarianceModel cov = sigma_from_field(field);
  NormalStream stream(stream_seed(2026, 0));
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    cvec x(field.dim), y(field.dim);
    for (std::size_t k = 0; k < field.dim; ++k) {
      x[k] = cd(stream.next(), stream.next());
      y[k] = cd(stream.next(), stream.next());
    }
    for (long long n : {0LL, 1LL, 7LL, 23LL}) {
      const cd a = corr_linear(field, x, y, n);
      const cd b = corr_linear_direct(op, cov, x, y, n);
      const double scale =
          std::max(std::abs(b), norm(x) * norm(y) * field_norm_sq(field));
      worst = std::max(worst, std::abs(a - b) / scale);
    }
  }
  report(results, "pairing-quadrature-vs-coordinate-sum", worst <= 1e-12,
         "worst normalized gap " + fmt(worst));
}

void suite_basis_pair(std::vector<SuiteResult>& results) {
  const EigenvectorField field = make_weighted_shift_field(1.0, 80);
  double worst = 0.0;
  for (std::size_t k = 1; k <= 24; k += 7) {
    for (long long n : {1LL, 2LL, 9LL}) {
      cvec x(field.dim), y(field.dim);
      x[k] = 1.0;
      y[k + static_cast<std::size_t>(n)] = 1.0;
      const cd got = corr_linear(field, x, y, n);
      const double want = 1.0 / (static_cast<double>(k) * static_cast<double>(k + n));
      worst = std::max(worst, std::abs(got - want));
    }
  }
  report(results, "basis-pair-closed-form", worst <= 1e-12, "worst gap " + fmt(worst));
}

void suite_norm_sq_identity(std::vector<SuiteResult>& results) {
  const EigenvectorField field = make_weighted_shift_field(1.0, 20000);
  const OperatorModel op = make_operator(field);
  const CovarianceModel cov = sigma_from_field(field);
  const double at_zero = norm_sq_correlation(op, cov, 0);
  const double exact_zero = 4.0 * sum_sigma_4(cov);
  const double at_one = norm_sq_correlation(op, cov, 1);
  const double want_one = 1.0 + kPi * kPi / 3.0 - 3.0;  // sum 1/(k(k+1))^2 closed form
  const bool ok = std::fabs(at_zero - exact_zero) <= 1e-12 * exact_zero &&
                  std::fabs(at_one - want_one) <= 2e-4;
  report(results, "norm-squared-covariance-closed-form", ok,
         "n=1 value " + fmt(at_one) + " vs " + fmt(want_one));
}

void suite_self_covariance(std::vector<SuiteResult>& results) {
  const EigenvectorField field = make_weighted_shift_field(1.0, 16);
  const OperatorModel op = make_operator(field);
  const CovarianceModel cov = sigma_from_field(field);
  bool ok = true;
  for (const std::vector<int>& idx :
       {std::vector<int>{1}, {2, 2}, {1, -3}, {1, 1, 2}, {-2, -2, 4, 5}}) {
    const WickMonomial mono = make_monomial(idx, field.dim);
    const double var = monomial_variance(mono, cov);
    const double corr0 = monomial_corr(mono, mono, op, cov, 0);
    if (var != corr0) ok = false;  // bitwise: both sides share factor order
  }
  report(results, "renormalized-self-covariance-equals-variance", ok,
         ok ? "bitwise equal" : "mismatch");
}

void suite_moments(std::vector<SuiteResult>& results) {
  const EigenvectorField field = make_weighted_shift_field(1.0, 16);
  const CovarianceModel cov = sigma_from_field(field);
  const GaussianSampler sampler{cov, 77, 0};
  bool ok = true;
  std::string detail;
  for (int k = 1; k <= 2; ++k) {
    const MomentEstimate est = empirical_moment(sampler, 60000, k);
    const double want = exact_moment(cov, k);
    if (std::fabs(est.value - want) > 4.0 * est.stderr_) ok = false;
    if (!(want <= moment_bound(cov, k))) ok = false;
    if (k == 2) detail = "k=2 " + fmt(est.value) + " vs " + fmt(want);
  }
  report(results, "gaussian-norm-moments", ok, detail);
}

void suite_witness(std::vector<SuiteResult>& results) {
  const EigenvectorField field = make_weighted_shift_field(1.0, 64);
  const Witness witness = slow_witness(field, 0.9, 40);
  double worst_excess = 0.0;
  for (long long n = 1; n <= 12; ++n) {
    const double got = witness_corr(witness, n);
    const double gap = std::fabs(got - witness.prediction(n));
    worst_excess = std::max(worst_excess, gap - witness.tail_deficit(n));
  }
  const cd spectral = corr_linear(field, witness.vector, witness.vector, 5);
  const double cross_route = std::abs(spectral - cd(witness_corr(witness, 5), 0.0));
  const bool ok = worst_excess <= 0.0 && cross_route <= 1e-12;
  report(results, "slow-decay-witness-prediction", ok,
         "deficit slack " + fmt(worst_excess) + ", route gap " + fmt(cross_route));
}

// Index runs long enough that T^n still pairs terms up at every audited n;
// isolated indices would make every correlation vanish and the audit vacuous.
ChaosObservable audit_observable(std::size_t dim) {
  std::vector<ChaosTerm> terms;
  for (int k = 1; k <= 48; ++k) {
    terms.push_back(ChaosTerm{WickMonomial{{k}}, 0.6 / k});
    terms.push_back(ChaosTerm{WickMonomial{{k, k}}, 0.2 / k});
    terms.push_back(ChaosTerm{WickMonomial{{k, k + 2}}, 0.3 / k});
    terms.push_back(ChaosTerm{WickMonomial{{-k, k + 1}}, -0.15 / k});
  }
  return make_chaos_observable(dim, 0.0, std::move(terms));
}

void suite_decay_bounds(std::vector<SuiteResult>& results, bool sabotage) {
  const EigenvectorField field = normalize_field(make_weighted_shift_field(1.0, 128), 0.5);
  const OperatorModel op = make_operator(field);
  const CovarianceModel cov = sigma_from_field(field);
  const HolderData holder = make_holder_data(field);
  const ChaosObservable f = audit_observable(field.dim);
  const std::vector<long long> ns = {2, 4, 8, 16};
  const BoundReport rep = bound_report(field, op, cov, f, f, ns, holder);

  // Sabotage models a sampler whose covariance drifted off the certified one:
  // the observed correlations use the corrupted sigmas, the certificates the
  // clean field.  The audit must trip.  The inflated constants absorb about
  // two orders of magnitude, hence the large factor.
  CovarianceModel observed_cov = cov;
  if (sabotage)
    for (double& s : observed_cov.sigma) s *= 32.0;

  bool ok = rep.aggregate_applicable;
  double worst_ratio = 0.0;
  for (long long n : ns) {
    const double n_alpha = std::pow(static_cast<double>(n), rep.alpha);
    KahanSum<double> total;
    for (const DegreeBoundRow& row : rep.rows) {
      const double obs = chaos_corr_degree(f, f, row.degree, op, observed_cov, n);
      total.add(obs);
      const double ratio = std::fabs(obs) / (row.constant / n_alpha);
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 1.0) ok = false;
    }
    if (std::fabs(total.value()) > rep.aggregate_constant / n_alpha) ok = false;
  }
  report(results, "correlation-decay-bound-audit", ok,
         "worst observed/bound " + fmt(worst_ratio));
}

void suite_csv_determinism(std::vector<SuiteResult>& results) {
  ExperimentConfig config;
  config.field = {{"kind", "weighted_shift"}, {"kappa", 1.0}, {"dim", 64}};
  config.orders = {1, 2, 4};
  config.routes = {Route::direct, Route::mc};
  config.mc_samples = 8000;
  config.seed = 5;
  const auto render = [&]() {
    std::ostringstream csv;
    write_csv(csv, run_correlate(config));
    return csv.str();
  };
  setenv("MIXLAB_THREADS", "7", 1);
  const std::string first = render();
  setenv("MIXLAB_THREADS", "1", 1);
  const std::string second = render();
  unsetenv("MIXLAB_THREADS");
  const bool ok = first == second && !first.empty();
  report(results, "csv-bytes-independent-of-worker-count", ok,
         ok ? "identical across 7 and 1 workers" : "byte mismatch");
}

void suite_rng_streams(std::vector<SuiteResult>& results) {
  const CovarianceModel cov{std::vector<double>(8, 1.0)};
  SampleCursor a(cov, 11, 3), b(cov, 11, 3), c(cov, 11, 4);
  cvec xa(8), xb(8), xc(8);
  bool same = true, distinct = false;
  for (int i = 0; i < 16; ++i) {
    a.next(xa);
    b.next(xb);
    c.next(xc);
    if (xa != xb) same = false;
    if (xa != xc) distinct = true;
  }
  report(results, "sampler-streams-reproducible-and-disjoint", same && distinct,
         same ? "replay exact, streams differ" : "replay diverged");
}

int cmd_verify(bool sabotage) {
  std::vector<SuiteResult> results;
  suite_rng_streams(results);
  suite_route_agreement(results);
  suite_basis_pair(results);
  suite_norm_sq_identity(results);
  suite_self_covariance(results);
  suite_moments(results);
  suite_witness(results);
  suite_decay_bounds(results, sabotage);
  suite_csv_determinism(results);
  int failures = 0;
  for (const SuiteResult& r : results)
    if (!r.ok) ++failures;
  std::printf("%d/%zu suites passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for mixing of linear dynamics with Gaussian measures"};
  app.require_subcommand(1);

  std::string config_path, out_path, json_path, orders_flag, routes_flag;
  std::uint64_t seed_flag = 0;
  bool sabotage = false;

  CLI::App* info = app.add_subcommand("field-info", "inspect a field spec");
  info->add_option("--config", config_path, "field spec or experiment config (json)")
      ->required();
  info->add_option("--out", out_path, "write the report here instead of stdout");

  CLI::App* corr = app.add_subcommand("correlate", "tabulate correlation decay");
  corr->add_option("--config", config_path, "experiment config (json)")->required();
  corr->add_option("--out", out_path, "write the csv here instead of stdout");
  corr->add_option("--json", json_path, "also write a json results document");
  corr->add_option("--n", orders_flag, "orders when the config has none, e.g. 1:64:log");
  corr->add_option("--routes", routes_flag, "routes when the config has none (comma list)");
  CLI::Option* seed_opt = corr->add_option("--seed", seed_flag, "override the config seed");

  CLI::App* verify = app.add_subcommand("verify", "run the self-check suites");
  verify->add_flag("--sabotage", sabotage,
                   "corrupt the sampled covariance to prove the bound audit trips");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (info->parsed()) return cmd_field_info(config_path, out_path);
    if (corr->parsed())
      return cmd_correlate(config_path, out_path, json_path, orders_flag, routes_flag, seed_flag,
                           seed_opt->count() > 0);
    if (verify->parsed()) return cmd_verify(sabotage);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
