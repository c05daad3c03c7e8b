#include "mixlab/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixlab/measure.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

const char* route_name(Route route) {
  switch (route) {
    case Route::spectral: return "spectral";
    case Route::direct: return "direct";
    case Route::chaos: return "chaos";
    case Route::mc: return "mc";
    case Route::witness: return "witness";
  }
  return "unknown";
}

McEstimate corr_mc(const OperatorModel& op, const CovarianceModel& cov, const Observable& f,
                   const Observable& g, long long n, std::size_t n_samples, std::uint64_t seed,
                   const McOptions& opts) {
  if (n < 0) throw std::invalid_argument("corr_mc: n must be nonnegative");
  if (cov.sigma.size() != op.dim) throw std::invalid_argument("corr_mc: dimension mismatch");
  if (n_samples < 1000) throw std::invalid_argument("corr_mc: need at least 1000 samples");
  const std::size_t n_streams = opts.n_streams;
  if (n_streams < 2 || n_streams > 4096)
    throw std::invalid_argument("corr_mc: n_streams out of range");
  const std::size_t per_stream = n_samples / n_streams;
  if (per_stream == 0) throw std::invalid_argument("corr_mc: fewer samples than streams");

  std::vector<double> fg_mean(n_streams), f_mean(n_streams), g_mean(n_streams);
  parallel_for(n_streams, [&](std::size_t b) {
    SampleCursor cursor(cov, seed, static_cast<std::uint64_t>(b));
    cvec x(op.dim);
    KahanSum<double> fg, fm, gm;
    for (std::size_t s = 0; s < per_stream; ++s) {
      cursor.next(x);
      const cvec tx = apply_power(op, x, n);
      const double fv = f(tx);
      const double gv = g(x);
      fg.add(fv * gv);
      fm.add(fv);
      gm.add(gv);
    }
    const double scale = 1.0 / static_cast<double>(per_stream);
    fg_mean[b] = fg.value() * scale;
    f_mean[b] = fm.value() * scale;
    g_mean[b] = gm.value() * scale;
  });

  const auto stream_average = [&](const std::vector<double>& v) {
    KahanSum<double> acc;
    for (double m : v) acc.add(m);
    return acc.value() / static_cast<double>(n_streams);
  };

  McEstimate est;
  double mu_f, mu_g;
  if (opts.mean_f) {
    mu_f = *opts.mean_f;
  } else {
    mu_f = stream_average(f_mean);
    est.plug_in_means = true;
  }
  if (opts.mean_g) {
    mu_g = *opts.mean_g;
  } else {
    mu_g = stream_average(g_mean);
    est.plug_in_means = true;
  }

  std::vector<double> centered(n_streams);
  for (std::size_t b = 0; b < n_streams; ++b) centered[b] = fg_mean[b] - mu_f * mu_g;
  est.value = stream_average(centered);
  KahanSum<double> var;
  for (double v : centered) var.add((v - est.value) * (v - est.value));
  est.stderr_ = std::sqrt(var.value() / (static_cast<double>(n_streams) - 1.0)) /
                std::sqrt(static_cast<double>(n_streams));
  return est;
}

PowerSums weighted_power_sums(const OperatorModel& op, const CovarianceModel& cov, long long n) {
  if (n < 0) throw std::invalid_argument("weighted_power_sums: n must be nonnegative");
  if (cov.sigma.size() != op.dim)
    throw std::invalid_argument("weighted_power_sums: dimension mismatch");
  KahanSum<double> s2, s4;
  if (op.kind == OperatorKind::weighted_shift) {
    for (std::size_t l = static_cast<std::size_t>(std::min<long long>(n, op.dim)); l < op.dim;
         ++l) {
      double p = 1.0;
      for (std::size_t j = l - static_cast<std::size_t>(n); j < l; ++j)
        p *= std::norm(op.weights[j]);
      const double sig_sq = cov.sigma[l] * cov.sigma[l];
      s2.add(sig_sq * p);
      s4.add(sig_sq * sig_sq * p);
    }
  } else {
    for (std::size_t l = 0; l < op.dim; ++l) {
      const double p = norm_sq(basis_column_power(op, l, n));
      const double sig_sq = cov.sigma[l] * cov.sigma[l];
      s2.add(sig_sq * p);
      s4.add(sig_sq * sig_sq * p);
    }
  }
  return PowerSums{s2.value(), s4.value()};
}

double norm_sq_correlation(const OperatorModel& op, const CovarianceModel& cov, long long n) {
  return 4.0 * weighted_power_sums(op, cov, n).s4;
}

DecayFit fit_decay(const std::vector<long long>& ns, const std::vector<double>& values,
                   DecayKind kind) {
  if (ns.size() != values.size()) throw std::invalid_argument("fit_decay: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) continue;
    const double v = std::fabs(values[i]);
    if (!(v > 1e-14)) continue;
    xs.push_back(kind == DecayKind::power_law ? std::log(static_cast<double>(ns[i]))
                                              : static_cast<double>(ns[i]));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 3) throw NoSignalError("fit_decay: fewer than 3 points above the noise floor");
  const LineFit line = fit_line(xs, ys);
  DecayFit fit;
  fit.kind = kind;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  fit.n_used = xs.size();
  return fit;
}

double Witness::prediction(long long n) const { return std::pow(r, static_cast<double>(n)); }

double Witness::tail_deficit(long long n) const {
  const double exponent = n <= static_cast<long long>(cutoff)
                              ? static_cast<double>(2 * cutoff + 2 - static_cast<std::size_t>(n))
                              : static_cast<double>(n);
  return std::pow(r, exponent) + roundoff;
}

Witness slow_witness(const EigenvectorField& field, double r, std::size_t cutoff) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("slow_witness: need 0 < r < 1");
  if (field.kind != FieldKind::monomial)
    throw std::invalid_argument("slow_witness: needs explicit monomial coefficients");
  if (cutoff + 1 > field.dim || cutoff == 0)
    throw std::invalid_argument("slow_witness: cutoff out of range");
  Witness w;
  w.r = r;
  w.cutoff = cutoff;
  const double head = std::sqrt(1.0 - r * r);
  w.profile.resize(cutoff + 1);
  w.vector.assign(field.dim, cd{0.0, 0.0});
  double rk = 1.0;
  double profile_abs_sum = 0.0;
  KahanSum<double> weight_sq;
  for (std::size_t k = 0; k <= cutoff; ++k) {
    const cd c = field.coeffs[k];
    if (std::abs(c) == 0.0)
      throw std::invalid_argument("slow_witness: field coefficient vanishes below cutoff");
    const double b = head * rk;
    w.profile[k] = b;
    w.vector[k] = b / std::conj(c);
    profile_abs_sum += b;
    weight_sq.add(std::norm(w.vector[k]) * 0.5 * std::norm(c));
    rk *= r;
  }
  w.sum_weight_sq = weight_sq.value();
  // Circle quadrature loses about eps per sample of |profile|^2 <= (sum b_k)^2.
  w.roundoff = 64.0 * std::numeric_limits<double>::epsilon() * profile_abs_sum * profile_abs_sum;
  return w;
}

double witness_corr(const Witness& witness, long long n, std::size_t quad_nodes) {
  if (n < 0) throw std::invalid_argument("witness_corr: n must be nonnegative");
  const std::size_t required =
      2 * (witness.cutoff + 1) + static_cast<std::size_t>(n);
  std::size_t m = quad_nodes == 0 ? required : quad_nodes;
  if (m < required)
    throw std::invalid_argument("witness_corr: quadrature too coarse, need at least " +
                                std::to_string(required) + " nodes");
  CircleQuadrature quad(m);
  std::vector<cd> h(m);
  for (std::size_t j = 0; j < m; ++j) {
    KahanSum<cd> phi;
    for (std::size_t k = 0; k < witness.profile.size(); ++k)
      phi.add(witness.profile[k] * quad.unit_power(j, static_cast<long long>(k)));
    h[j] = cd(std::norm(phi.value()), 0.0);
  }
  return quad.moment(h, n).real();
}

double witness_rate_for_target(double beta, long long n_max) {
  if (!(beta > 0.0)) throw std::invalid_argument("witness_rate_for_target: beta must be > 0");
  if (n_max < 1) throw std::invalid_argument("witness_rate_for_target: n_max must be >= 1");
  return std::pow(static_cast<double>(n_max),
                  -0.99 * beta / static_cast<double>(n_max));
}

ExpTypeObservable exp_type_observable(const CovarianceModel& cov, double tau,
                                      double tail_sq_bound) {
  if (!(tail_sq_bound >= 0.0) || !std::isfinite(tail_sq_bound))
    throw std::invalid_argument("exp_type_observable: bad tail bound");
  ExpTypeObservable obs;
  obs.tau = tau;
  KahanSum<double> sig_sum;
  for (double s : cov.sigma) sig_sum.add(s * s);
  const double e2 = 2.0 * sig_sum.value() + tail_sq_bound;
  obs.threshold = 1.0 / (2.0 * e2);
  if (!(tau > 0.0) || !(tau < obs.threshold))
    throw std::invalid_argument("exp_type_observable: tau outside (0, threshold)");
  double mean = 1.0, l2 = 1.0;
  for (double s : cov.sigma) {
    mean /= 1.0 - 2.0 * tau * s * s;
    l2 /= 1.0 - 4.0 * tau * s * s;
  }
  obs.mean = mean;
  obs.l2_sq = l2;
  obs.eval = [tau](const cvec& z) { return std::exp(tau * norm_sq(z)); };
  return obs;
}

HolderData make_holder_data(const EigenvectorField& field) {
  const HolderEstimate est = holder_estimate(field);
  HolderData h;
  h.alpha = field.holder_alpha ? *field.holder_alpha : est.alpha_hat;
  // Doubling covers the fit window bias; the fitted constant tracks the small
  // theta regime and the modulus is concave in theta.
  h.c_hat = 2.0 * est.c_hat;
  return h;
}

BoundReport bound_report(const EigenvectorField& field, const OperatorModel& op,
                         const CovarianceModel& cov, const ChaosObservable& f,
                         const ChaosObservable& g, const std::vector<long long>& ns,
                         const HolderData& holder) {
  for (long long n : ns)
    if (n < 1) throw std::invalid_argument("bound_report: orders must be >= 1");
  BoundReport rep;
  rep.alpha = holder.alpha;
  rep.c_hat = holder.c_hat;
  KahanSum<double> sig_sum;
  for (double s : cov.sigma) sig_sum.add(s * s);
  double e2 = 2.0 * sig_sum.value();
  if (std::isfinite(field.tail_sq_bound)) e2 += field.tail_sq_bound;
  rep.field_norm = std::sqrt(e2);
  rep.x_norm_f = x_norm(f, cov);
  rep.y_norm_g = y_norm(g, cov);

  const SymmetricCoefficients sym_f = symmetrize(f);
  const SymmetricCoefficients sym_g = symmetrize(g);
  const double pi_alpha = std::pow(kPi, holder.alpha);
  for (const auto& [degree, table] : sym_f.degrees) {
    (void)table;
    if (!sym_g.degrees.count(degree)) continue;
    DegreeBoundRow row;
    row.degree = degree;
    row.upper_f = multilinear_norm(sym_f, degree).upper;
    row.upper_g = multilinear_norm(sym_g, degree).upper;
    double fact = 1.0;
    for (int j = 2; j <= degree; ++j) fact *= j;
    row.constant = fact * holder.c_hat * pi_alpha *
                   std::pow(rep.field_norm, 2.0 * degree - 1.0) * row.upper_f * row.upper_g;
    rep.rows.push_back(row);
  }

  rep.aggregate_applicable = e2 < 1.0;
  if (rep.aggregate_applicable) {
    const double cprime = holder.c_hat * pi_alpha * std::sqrt(e2 / (1.0 - e2 * e2));
    rep.aggregate_constant = cprime * rep.x_norm_f * rep.y_norm_g;
  }

  const double l2_f = std::sqrt(std::max(0.0, observable_l2_sq(f, cov) - f.degree0 * f.degree0));
  const double l2_g = std::sqrt(std::max(0.0, observable_l2_sq(g, cov) - g.degree0 * g.degree0));

  double rate_constant = 0.0;
  for (long long n : ns) {
    BoundCheck check;
    check.n = n;
    const double n_alpha = std::pow(static_cast<double>(n), holder.alpha);
    KahanSum<double> total;
    for (const DegreeBoundRow& row : rep.rows) {
      const double obs = chaos_corr_degree(f, g, row.degree, op, cov, n);
      check.observed_by_degree.push_back(obs);
      total.add(obs);
      if (std::fabs(obs) > row.constant / n_alpha) check.per_degree_ok = false;
    }
    check.observed_total = total.value();
    if (rep.aggregate_applicable) {
      check.aggregate_bound = rep.aggregate_constant / n_alpha;
      check.aggregate_ok = std::fabs(check.observed_total) <= check.aggregate_bound;
    }
    if (l2_f > 0.0 && l2_g > 0.0)
      rate_constant =
          std::max(rate_constant, std::fabs(check.observed_total) * n_alpha / (l2_f * l2_g));
    rep.checks.push_back(std::move(check));
  }
  rep.empirical_rate_constant = rate_constant;
  return rep;
}

}  // namespace mixlab
