#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "mixlab/chaos.hpp"
#include "mixlab/quadrature.hpp"

namespace mixlab {

// The evaluation routes for the correlation of order n,
//   I_n(f, g) = integral f(T^n x) g(x) dm - integral f dm * integral g dm.
enum class Route { spectral, direct, chaos, mc, witness };
const char* route_name(Route route);

// Thrown when a decay fit has nothing to fit (all values at the noise floor).
struct NoSignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Observable = std::function<double(const cvec&)>;

struct McOptions {
  std::optional<double> mean_f;  // analytic mean of f, subtracted exactly when given
  std::optional<double> mean_g;
  std::size_t n_streams = 64;  // fixed RNG substreams; result independent of worker count
};

struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  bool plug_in_means = false;  // true when a sample mean replaced a missing analytic one
};

// Monte Carlo estimate of I_n(f, g): substream b draws n_samples / n_streams
// points, averages f(T^n x) g(x), and the centered batch means give value and
// spread.  Bit-reproducible for fixed (seed, n_streams).
McEstimate corr_mc(const OperatorModel& op, const CovarianceModel& cov, const Observable& f,
                   const Observable& g, long long n, std::size_t n_samples, std::uint64_t seed,
                   const McOptions& opts = {});

struct PowerSums {
  double s2 = 0.0;  // sum_l sigma_l^2 ||T^n e_l||^2
  double s4 = 0.0;  // sum_l sigma_l^4 ||T^n e_l||^2
};

PowerSums weighted_power_sums(const OperatorModel& op, const CovarianceModel& cov, long long n);

// Exact I_n(||.||^2, ||.||^2) = 4 sum_l sigma_l^4 ||T^n e_l||^2.
double norm_sq_correlation(const OperatorModel& op, const CovarianceModel& cov, long long n);

enum class DecayKind { power_law, exponential };

struct DecayFit {
  DecayKind kind = DecayKind::power_law;
  double slope = 0.0;  // d log|v| / d log n (power law) or d log|v| / d n (exponential)
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_used = 0;
};

// Least squares on log|value|; points with n < 1 or |value| <= 1e-14 are
// dropped, fewer than 3 survivors throws NoSignalError.
DecayFit fit_decay(const std::vector<long long>& ns, const std::vector<double>& values,
                   DecayKind kind);

// Linear observable f = <v, .> built so that <v, E(lambda)> =
// sqrt(1 - r^2) sum_{k <= K} r^k lambda^k.  Its autocorrelation is
// I_n = r^n (1 - r^{2(K - n + 1)}) for n <= K and 0 beyond: arbitrarily slow
// decay as r -> 1, which rules out any uniform rate over plain L^2 data.
struct Witness {
  double r = 0.0;
  std::size_t cutoff = 0;        // K, top retained power
  std::vector<double> profile;   // b_k = sqrt(1 - r^2) r^k, the circle-side coefficients
  cvec vector;                   // v with <v, e_k> matching the profile through the field
  double sum_weight_sq = 0.0;    // sum |v_k|^2 sigma_k^2 = (1 - r^{2K+2}) / 2
  double roundoff = 0.0;         // quadrature noise allowance for the deficit bound

  double prediction(long long n) const;  // r^n
  // |I_n - r^n| <= exact truncation deficit + roundoff.
  double tail_deficit(long long n) const;
};

Witness slow_witness(const EigenvectorField& field, double r, std::size_t cutoff);

// I_n of the witness against itself, by circle quadrature on |profile|^2.
double witness_corr(const Witness& witness, long long n, std::size_t quad_nodes = 0);

// Rate r = n_max^{-0.99 beta / n_max}: the witness correlation at n_max then
// exceeds n_max^{-beta}, defeating a conjectured uniform n^{-beta} bound.
double witness_rate_for_target(double beta, long long n_max);

// exp(tau ||x||^2) data: integrable iff 2 tau sigma_k^2 < 1 for all k; the
// threshold below uses the stronger tau < 1 / (2 ||E||_2^2) which also keeps
// the observable in L^2.
struct ExpTypeObservable {
  double tau = 0.0;
  double mean = 0.0;   // prod_k (1 - 2 tau sigma_k^2)^{-1}
  double l2_sq = 0.0;  // prod_k (1 - 4 tau sigma_k^2)^{-1}
  double threshold = 0.0;
  Observable eval;
};

ExpTypeObservable exp_type_observable(const CovarianceModel& cov, double tau,
                                      double tail_sq_bound = 0.0);

// Regularity data for decay bounds: alpha is the modulus exponent (exact when
// the family pins it, fitted otherwise) and c_hat an inflated fit of the
// modulus constant, ||E(e^{i theta}) - E(1)|| <= c_hat |theta|^alpha.
struct HolderData {
  double alpha = 0.0;
  double c_hat = 0.0;
};

HolderData make_holder_data(const EigenvectorField& field);

struct DegreeBoundRow {
  int degree = 0;
  double upper_f = 0.0;  // Frobenius bracket of f's degree-k coefficients
  double upper_g = 0.0;
  double constant = 0.0;  // k! c_hat pi^alpha ||E||^{2k-1} upper_f upper_g
};

struct BoundCheck {
  long long n = 0;
  std::vector<double> observed_by_degree;  // aligned with BoundReport::rows
  double observed_total = 0.0;
  bool per_degree_ok = true;
  double aggregate_bound = 0.0;  // 0 when not applicable
  bool aggregate_ok = true;
};

struct BoundReport {
  double alpha = 0.0;
  double c_hat = 0.0;
  double field_norm = 0.0;  // sqrt(2 sum sigma^2 + tail bound)
  double x_norm_f = 0.0;
  double y_norm_g = 0.0;
  bool aggregate_applicable = false;  // needs ||E||_2^2 < 1
  double aggregate_constant = 0.0;    // c_hat pi^alpha sqrt(e2 / (1 - e2^2)) ||f||_X ||g||_Y
  std::vector<DegreeBoundRow> rows;
  std::vector<BoundCheck> checks;
  // max_n |I_n| n^alpha / (centered L^2 norms); reported, never asserted.
  double empirical_rate_constant = 0.0;
};

// Checks the per-degree and aggregate decay bounds against exact chaos-route
// correlations at the given orders (all >= 1).
BoundReport bound_report(const EigenvectorField& field, const OperatorModel& op,
                         const CovarianceModel& cov, const ChaosObservable& f,
                         const ChaosObservable& g, const std::vector<long long>& ns,
                         const HolderData& holder);

}  // namespace mixlab
