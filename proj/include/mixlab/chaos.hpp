#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "mixlab/model.hpp"

namespace mixlab {

// Signed indexing of real coordinate directions: a nonzero integer l with
// 1 <= |l| <= dim - 1 addresses coordinate |l|; positive sign is the real
// direction e_l, negative the rotated one i e_l, and sigma_{-l} = sigma_l.
// Re<e_l, z> reads Re(z_l) resp. Im(z_l).  Coordinate 0 carries Gaussian mass
// but only enters through the linear/spectral and norm-squared routes.

// Probabilists' Hermite polynomial by the three-term recurrence
// H_{k+1}(t) = t H_k(t) - k H_{k-1}(t); k capped at 64.
double hermite(int k, double t);

// sigma_x^k H_k(Re<x,z> / sigma_x): the renormalized k-th power of the real
// linear coordinate Re<x,.> (zero mean against the measure for k >= 1).
double wick_power_eval(const cvec& x, int k, const cvec& z, double sigma_x);

// Product of renormalized powers over the distinct directions named by a
// sorted multiset of signed indices.  Degree = number of entries, capped at 20.
struct WickMonomial {
  std::vector<int> indices;
};

WickMonomial make_monomial(std::vector<int> indices, std::size_t dim);
// Run-length groups (index, multiplicity) of the sorted index list.
std::vector<std::pair<int, int>> monomial_groups(const WickMonomial& mono);

double monomial_eval(const WickMonomial& mono, const cvec& z, const CovarianceModel& cov);
// Second moment: prod_t l_t! * prod_s sigma_{|b_s|}^2 over the multiset.
double monomial_variance(const WickMonomial& mono, const CovarianceModel& cov);

// Permanent kernels on row-major k x k tables.  The naive kernel iterates
// permutations in lexicographic order and multiplies factors in row order;
// tests replicate that arithmetic exactly.
double permanent_naive(const std::vector<double>& m, int k);
double permanent_ryser(const std::vector<double>& m, int k);
// Dispatch: naive for k <= 6, Ryser for k <= 20, error beyond.
double permanent(const std::vector<double>& m, int k);

// Covariance of renormalized monomials across n steps of the dynamics:
//   integral mono_a(T^n x) mono_b(x) dm
//     = prod_s sigma_{|b_s|}^2 * perm( Re<e_{a_t}, T^n e_{b_s}> )_{t,s}.
// Cross-degree pairs vanish identically and return exact 0.
double monomial_corr(const WickMonomial& a, const WickMonomial& b, const OperatorModel& op,
                     const CovarianceModel& cov, long long n);

struct ChaosTerm {
  WickMonomial monomial;
  double coeff = 0.0;
};

// Finite linear combination of renormalized monomials plus a constant.
struct ChaosObservable {
  std::size_t dim = 0;
  double degree0 = 0.0;
  std::vector<ChaosTerm> terms;  // distinct monomials, sorted by (degree, indices)
};

ChaosObservable make_chaos_observable(std::size_t dim, double degree0,
                                      std::vector<ChaosTerm> terms);
double observable_eval(const ChaosObservable& f, const cvec& z, const CovarianceModel& cov);
// ||f||_{L^2}^2 = degree0^2 + sum coeff^2 * variance (terms are orthogonal).
double observable_l2_sq(const ChaosObservable& f, const CovarianceModel& cov);
int observable_max_degree(const ChaosObservable& f);

// Centered correlation sum over equal-degree term pairs.
double chaos_corr(const ChaosObservable& f, const ChaosObservable& g, const OperatorModel& op,
                  const CovarianceModel& cov, long long n);
// Contribution of a single shared degree.
double chaos_corr_degree(const ChaosObservable& f, const ChaosObservable& g, int degree,
                         const OperatorModel& op, const CovarianceModel& cov, long long n);

// Symmetric coefficient tables: alpha_tuple = (prod_t l_t! / k!) * coeff, one
// value per sorted tuple, representing the symmetric k-linear form whose
// diagonal recovers the degree-k part.
struct SymmetricCoefficients {
  std::size_t dim = 0;
  std::map<int, std::map<std::vector<int>, double>> degrees;
};

SymmetricCoefficients symmetrize(const ChaosObservable& f);
ChaosObservable desymmetrize(const SymmetricCoefficients& sym, double degree0);

struct NormBracket {
  double lower = 0.0;  // certified: value of the form at the best unit vector found
  double upper = 0.0;  // Frobenius norm over ordered tuples
};

// Norm bracket for the symmetric k-linear form.  k = 1: exact (Euclidean);
// k = 2: lower is the exact spectral norm (Jacobi); k >= 3: lower from a
// shifted symmetric power iteration over 8 deterministic starts.
NormBracket multilinear_norm(const SymmetricCoefficients& sym, int k);

// sqrt(||f||_{L^2}^2 + sum_{k>=1} upper_k^2); conservative (upper brackets).
double x_norm(const ChaosObservable& f, const CovarianceModel& cov);
// ||f||_{L^2} + max_{k>=1} k! upper_k; conservative.
double y_norm(const ChaosObservable& f, const CovarianceModel& cov);

// Explicit polynomial in the real coordinates Re<e_v, .> for finitely many
// distinct signed indices v.  Exponent keys align with `vars`.
struct PolyObservable {
  std::vector<int> vars;
  std::map<std::vector<int>, double> terms;
};

PolyObservable make_poly(std::vector<int> vars, std::map<std::vector<int>, double> terms,
                         std::size_t dim);
double poly_eval(const PolyObservable& p, const cvec& z);
// Mixed directional derivative along e_{dirs[0]}, ..., e_{dirs[k-1]} at z;
// directions outside `vars` differentiate to zero.
double poly_derivative_eval(const PolyObservable& p, const cvec& z, const std::vector<int>& dirs);
// Exact expansion into renormalized monomials (powers expand through the
// Hermite basis; distinct directions multiply freely).
ChaosObservable poly_to_chaos(const PolyObservable& p, const CovarianceModel& cov,
                              std::size_t dim);

struct CoeffCheckEntry {
  std::vector<int> tuple;
  double algebraic = 0.0;
  double mc_value = 0.0;
  double mc_stderr = 0.0;
};

struct CoeffCheckReport {
  std::map<int, std::vector<CoeffCheckEntry>> by_degree;
};

// Expansion coefficients two ways: algebraically from poly_to_chaos, and as
// (1 / prod_t l_t!) * E[ D^k f(x) at the tuple directions ] by Monte Carlo
// over n_samples draws (32 substreams for the stderr).
CoeffCheckReport coeff_from_derivatives(const PolyObservable& p, const CovarianceModel& cov,
                                        std::uint64_t seed, std::size_t n_samples);

}  // namespace mixlab
