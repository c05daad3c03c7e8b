#include "mixlab/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "mixlab/measure.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

constexpr int kMaxHermite = 64;
constexpr int kMaxDegree = 20;

double pow_int(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double factorial_d(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Number of distinct orderings of a sorted multiset, k!/prod l!; exact in
// uint64_t for k <= 20.
std::uint64_t ordering_count(const std::vector<std::pair<int, int>>& groups) {
  std::uint64_t total = 0;
  std::uint64_t ways = 1;
  for (const auto& [idx, mult] : groups) {
    (void)idx;
    for (int j = 1; j <= mult; ++j) {
      ++total;
      ways = ways * total / j;  // C(total, j) accumulates exactly
    }
  }
  return ways;
}

// Shared by monomial_variance and monomial_corr so the n = 0 self-covariance
// agrees with the variance bit for bit: same factor order, multiply last.
double sigma_product(const std::vector<int>& indices, const CovarianceModel& cov) {
  double p = 1.0;
  for (int idx : indices) {
    const double s = cov.sigma[static_cast<std::size_t>(std::abs(idx))];
    p *= s * s;
  }
  return p;
}

double real_direction(int idx, const cvec& z) {
  const std::size_t coord = static_cast<std::size_t>(std::abs(idx));
  return idx > 0 ? z[coord].real() : z[coord].imag();
}

void check_indices(const std::vector<int>& indices, std::size_t dim, const char* who) {
  for (int idx : indices) {
    if (idx == 0) throw std::invalid_argument(std::string(who) + ": index 0 is not addressable");
    if (static_cast<std::size_t>(std::abs(idx)) >= dim)
      throw std::invalid_argument(std::string(who) + ": index outside coordinate range");
  }
}

}  // namespace

double hermite(int k, double t) {
  if (k < 0 || k > kMaxHermite) throw std::invalid_argument("hermite: order out of range");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int j = 1; j < k; ++j) {
    const double next = t * cur - static_cast<double>(j) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double wick_power_eval(const cvec& x, int k, const cvec& z, double sigma_x) {
  if (!(sigma_x > 0.0)) throw std::invalid_argument("wick_power_eval: sigma must be positive");
  const double t = inner(x, z).real();
  return pow_int(sigma_x, k) * hermite(k, t / sigma_x);
}

WickMonomial make_monomial(std::vector<int> indices, std::size_t dim) {
  if (indices.empty()) throw std::invalid_argument("make_monomial: degree must be at least 1");
  if (indices.size() > static_cast<std::size_t>(kMaxDegree))
    throw std::invalid_argument("make_monomial: degree exceeds 20");
  check_indices(indices, dim, "make_monomial");
  std::sort(indices.begin(), indices.end());
  return WickMonomial{std::move(indices)};
}

std::vector<std::pair<int, int>> monomial_groups(const WickMonomial& mono) {
  std::vector<std::pair<int, int>> groups;
  for (int idx : mono.indices) {
    if (!groups.empty() && groups.back().first == idx) {
      ++groups.back().second;
    } else {
      groups.emplace_back(idx, 1);
    }
  }
  return groups;
}

double monomial_eval(const WickMonomial& mono, const cvec& z, const CovarianceModel& cov) {
  double value = 1.0;
  for (const auto& [idx, mult] : monomial_groups(mono)) {
    const double s = cov.sigma[static_cast<std::size_t>(std::abs(idx))];
    if (!(s > 0.0)) throw std::invalid_argument("monomial_eval: coordinate has zero sigma");
    const double t = real_direction(idx, z);
    value *= pow_int(s, mult) * hermite(mult, t / s);
  }
  return value;
}

double monomial_variance(const WickMonomial& mono, const CovarianceModel& cov) {
  check_indices(mono.indices, cov.sigma.size(), "monomial_variance");
  double fact = 1.0;
  for (const auto& [idx, mult] : monomial_groups(mono)) {
    (void)idx;
    for (int j = 2; j <= mult; ++j) fact *= j;
  }
  return fact * sigma_product(mono.indices, cov);
}

double permanent_naive(const std::vector<double>& m, int k) {
  if (k < 0) throw std::invalid_argument("permanent_naive: negative size");
  if (k == 0) return 1.0;
  if (m.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(k))
    throw std::invalid_argument("permanent_naive: size mismatch");
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
  double sum = 0.0;
  do {
    double prod = 1.0;
    for (int t = 0; t < k; ++t)
      prod *= m[static_cast<std::size_t>(t) * static_cast<std::size_t>(k) +
                static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])];
    sum += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

double permanent_ryser(const std::vector<double>& m, int k) {
  if (k < 0) throw std::invalid_argument("permanent_ryser: negative size");
  if (k == 0) return 1.0;
  if (k > kMaxDegree) throw std::invalid_argument("permanent_ryser: size exceeds 20");
  if (m.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(k))
    throw std::invalid_argument("permanent_ryser: size mismatch");
  const std::size_t n = static_cast<std::size_t>(k);
  // perm(A) = (-1)^k sum_{S nonempty} (-1)^{|S|} prod_t sum_{j in S} a_{t j},
  // with the column subset walked in Gray code order.
  std::vector<double> rowsum(n, 0.0);
  double sum = 0.0;
  std::uint64_t gray = 0;
  const std::uint64_t limit = (1ULL << k);
  for (std::uint64_t g = 1; g < limit; ++g) {
    const std::uint64_t next_gray = g ^ (g >> 1);
    const std::uint64_t diff = gray ^ next_gray;
    int j = 0;
    while (!((diff >> j) & 1ULL)) ++j;
    const bool added = (next_gray >> j) & 1ULL;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = m[t * n + static_cast<std::size_t>(j)];
      rowsum[t] += added ? a : -a;
    }
    gray = next_gray;
    int bits = 0;
    for (std::uint64_t v = gray; v; v >>= 1) bits += static_cast<int>(v & 1ULL);
    double prod = 1.0;
    for (std::size_t t = 0; t < n; ++t) prod *= rowsum[t];
    sum += ((k - bits) % 2 == 0) ? prod : -prod;
  }
  return sum;
}

double permanent(const std::vector<double>& m, int k) {
  if (k < 0) throw std::invalid_argument("permanent: negative size");
  if (k <= 6) return permanent_naive(m, k);
  if (k <= kMaxDegree) return permanent_ryser(m, k);
  throw std::invalid_argument("permanent: size exceeds 20");
}

namespace {

// Matrix entry Re<e_{a_t}, T^n e_{b_s}> from the cached column T^n e_{|b_s|}.
double corr_entry(int a_idx, int b_idx, const cvec& col) {
  cd v = col[static_cast<std::size_t>(std::abs(a_idx))];
  if (b_idx < 0) v = cd(0.0, 1.0) * v;
  return a_idx > 0 ? v.real() : v.imag();
}

double monomial_corr_cached(const WickMonomial& a, const WickMonomial& b,
                            const std::map<std::size_t, cvec>& cols,
                            const CovarianceModel& cov) {
  if (a.indices.size() != b.indices.size()) return 0.0;
  const int k = static_cast<int>(a.indices.size());
  const std::size_t n = static_cast<std::size_t>(k);
  std::vector<double> m(n * n);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      const int b_idx = b.indices[s];
      const auto& col = cols.at(static_cast<std::size_t>(std::abs(b_idx)));
      m[t * n + s] = corr_entry(a.indices[t], b_idx, col);
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    bool all_zero = true;
    for (std::size_t s = 0; s < n && all_zero; ++s) all_zero = (m[t * n + s] == 0.0);
    if (all_zero) return 0.0;
  }
  for (std::size_t s = 0; s < n; ++s) {
    bool all_zero = true;
    for (std::size_t t = 0; t < n && all_zero; ++t) all_zero = (m[t * n + s] == 0.0);
    if (all_zero) return 0.0;
  }
  const double p = permanent(m, k);
  return p * sigma_product(b.indices, cov);
}

std::map<std::size_t, cvec> column_cache(const std::vector<const WickMonomial*>& monos,
                                         const OperatorModel& op, long long n) {
  std::map<std::size_t, cvec> cols;
  for (const WickMonomial* mono : monos) {
    for (int idx : mono->indices) {
      const std::size_t coord = static_cast<std::size_t>(std::abs(idx));
      if (!cols.count(coord)) cols.emplace(coord, basis_column_power(op, coord, n));
    }
  }
  return cols;
}

}  // namespace

double monomial_corr(const WickMonomial& a, const WickMonomial& b, const OperatorModel& op,
                     const CovarianceModel& cov, long long n) {
  if (n < 0) throw std::invalid_argument("monomial_corr: n must be nonnegative");
  check_indices(a.indices, op.dim, "monomial_corr");
  check_indices(b.indices, op.dim, "monomial_corr");
  if (a.indices.size() != b.indices.size()) return 0.0;
  const auto cols = column_cache({&b}, op, n);
  return monomial_corr_cached(a, b, cols, cov);
}

ChaosObservable make_chaos_observable(std::size_t dim, double degree0,
                                      std::vector<ChaosTerm> terms) {
  std::map<std::vector<int>, double> merged;
  for (auto& term : terms) {
    WickMonomial mono = make_monomial(std::move(term.monomial.indices), dim);
    merged[std::move(mono.indices)] += term.coeff;
  }
  ChaosObservable f;
  f.dim = dim;
  f.degree0 = degree0;
  std::vector<std::pair<std::vector<int>, double>> items(merged.begin(), merged.end());
  std::sort(items.begin(), items.end(), [](const auto& lhs, const auto& rhs) {
    if (lhs.first.size() != rhs.first.size()) return lhs.first.size() < rhs.first.size();
    return lhs.first < rhs.first;
  });
  for (auto& [indices, coeff] : items) {
    if (coeff == 0.0) continue;
    f.terms.push_back(ChaosTerm{WickMonomial{std::move(indices)}, coeff});
  }
  return f;
}

double observable_eval(const ChaosObservable& f, const cvec& z, const CovarianceModel& cov) {
  KahanSum<double> sum;
  sum.add(f.degree0);
  for (const ChaosTerm& term : f.terms) sum.add(term.coeff * monomial_eval(term.monomial, z, cov));
  return sum.value();
}

double observable_l2_sq(const ChaosObservable& f, const CovarianceModel& cov) {
  KahanSum<double> sum;
  sum.add(f.degree0 * f.degree0);
  for (const ChaosTerm& term : f.terms)
    sum.add(term.coeff * term.coeff * monomial_variance(term.monomial, cov));
  return sum.value();
}

int observable_max_degree(const ChaosObservable& f) {
  int deg = 0;
  for (const ChaosTerm& term : f.terms)
    deg = std::max(deg, static_cast<int>(term.monomial.indices.size()));
  return deg;
}

double chaos_corr_degree(const ChaosObservable& f, const ChaosObservable& g, int degree,
                         const OperatorModel& op, const CovarianceModel& cov, long long n) {
  if (n < 0) throw std::invalid_argument("chaos_corr_degree: n must be nonnegative");
  std::vector<const ChaosTerm*> fs;
  std::vector<const ChaosTerm*> gs;
  for (const ChaosTerm& term : f.terms)
    if (static_cast<int>(term.monomial.indices.size()) == degree) fs.push_back(&term);
  for (const ChaosTerm& term : g.terms)
    if (static_cast<int>(term.monomial.indices.size()) == degree) gs.push_back(&term);
  if (fs.empty() || gs.empty()) return 0.0;
  std::vector<const WickMonomial*> g_monos;
  for (const ChaosTerm* term : gs) g_monos.push_back(&term->monomial);
  const auto cols = column_cache(g_monos, op, n);
  KahanSum<double> sum;
  for (const ChaosTerm* ft : fs)
    for (const ChaosTerm* gt : gs)
      sum.add(ft->coeff * gt->coeff * monomial_corr_cached(ft->monomial, gt->monomial, cols, cov));
  return sum.value();
}

double chaos_corr(const ChaosObservable& f, const ChaosObservable& g, const OperatorModel& op,
                  const CovarianceModel& cov, long long n) {
  if (f.dim != op.dim || g.dim != op.dim || cov.sigma.size() != op.dim)
    throw std::invalid_argument("chaos_corr: dimension mismatch");
  const int max_deg = std::min(observable_max_degree(f), observable_max_degree(g));
  KahanSum<double> sum;
  for (int degree = 1; degree <= max_deg; ++degree)
    sum.add(chaos_corr_degree(f, g, degree, op, cov, n));
  return sum.value();
}

SymmetricCoefficients symmetrize(const ChaosObservable& f) {
  SymmetricCoefficients sym;
  sym.dim = f.dim;
  for (const ChaosTerm& term : f.terms) {
    const int k = static_cast<int>(term.monomial.indices.size());
    const auto ord = ordering_count(monomial_groups(term.monomial));
    sym.degrees[k][term.monomial.indices] += term.coeff / static_cast<double>(ord);
  }
  return sym;
}

ChaosObservable desymmetrize(const SymmetricCoefficients& sym, double degree0) {
  std::vector<ChaosTerm> terms;
  for (const auto& [k, table] : sym.degrees) {
    (void)k;
    for (const auto& [indices, alpha] : table) {
      const auto ord = ordering_count(monomial_groups(WickMonomial{indices}));
      terms.push_back(ChaosTerm{WickMonomial{indices}, alpha * static_cast<double>(ord)});
    }
  }
  return make_chaos_observable(sym.dim, degree0, std::move(terms));
}

namespace {

// Largest |eigenvalue| of a dense symmetric matrix by cyclic Jacobi sweeps.
double jacobi_spectral_norm(std::vector<double> a, std::size_t d) {
  if (d == 0) return 0.0;
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return 0.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off = std::max(off, std::fabs(a[p * d + q]));
    if (off <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (std::fabs(apq) <= 1e-300) continue;
        const double tau = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t r = 0; r < d; ++r) {
          const double arp = a[r * d + p];
          const double arq = a[r * d + q];
          a[r * d + p] = c * arp - s * arq;
          a[r * d + q] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < d; ++r) {
          const double apr = a[p * d + r];
          const double aqr = a[q * d + r];
          a[p * d + r] = c * apr - s * aqr;
          a[q * d + r] = s * apr + c * aqr;
        }
      }
    }
  }
  double best = 0.0;
  for (std::size_t p = 0; p < d; ++p) best = std::max(best, std::fabs(a[p * d + p]));
  return best;
}

struct SparseTuple {
  std::vector<std::pair<std::size_t, int>> groups;  // (local var, multiplicity)
  double alpha_ord = 0.0;                           // alpha * (k!/prod l!)
};

// One shifted symmetric power iteration run; returns the form value at the
// fixed point.  Shift strength guarantees monotone convergence to a local
// maximum of the diagonal restriction (sup over equal slots equals the full
// sup for symmetric forms).
double shopm_run(const std::vector<SparseTuple>& tuples, int k, std::vector<double> x,
                 double shift) {
  const std::size_t d = x.size();
  std::vector<double> grad(d);
  const auto form_apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const SparseTuple& tup : tuples) {
      double full = tup.alpha_ord;
      for (const auto& [var, mult] : tup.groups) full *= pow_int(v[var], mult);
      for (const auto& [var, mult] : tup.groups) {
        if (v[var] != 0.0) {
          out[var] += full * mult / (static_cast<double>(k) * v[var]);
        } else {
          // recompute the tuple product without one factor of this variable
          double partial = tup.alpha_ord * mult / static_cast<double>(k);
          for (const auto& [var2, mult2] : tup.groups)
            partial *= pow_int(v[var2], var2 == var ? mult2 - 1 : mult2);
          out[var] += partial;
        }
      }
    }
  };
  for (int iter = 0; iter < 300; ++iter) {
    form_apply(x, grad);
    double nrm_sq = 0.0;
    for (std::size_t v = 0; v < d; ++v) {
      grad[v] += shift * x[v];
      nrm_sq += grad[v] * grad[v];
    }
    const double nrm = std::sqrt(nrm_sq);
    if (nrm == 0.0) break;
    for (std::size_t v = 0; v < d; ++v) x[v] = grad[v] / nrm;
  }
  form_apply(x, grad);
  double value = 0.0;
  for (std::size_t v = 0; v < d; ++v) value += x[v] * grad[v];
  return value;
}

}  // namespace

NormBracket multilinear_norm(const SymmetricCoefficients& sym, int k) {
  if (k < 1) throw std::invalid_argument("multilinear_norm: degree must be at least 1");
  const auto it = sym.degrees.find(k);
  if (it == sym.degrees.end() || it->second.empty()) return NormBracket{0.0, 0.0};
  const auto& table = it->second;

  KahanSum<double> frob_sq;
  for (const auto& [indices, alpha] : table) {
    const auto ord = ordering_count(monomial_groups(WickMonomial{indices}));
    frob_sq.add(static_cast<double>(ord) * alpha * alpha);
  }
  const double upper = std::sqrt(frob_sq.value());

  if (k == 1) return NormBracket{upper, upper};

  std::map<int, std::size_t> loc;
  for (const auto& [indices, alpha] : table) {
    (void)alpha;
    for (int idx : indices)
      if (!loc.count(idx)) loc.emplace(idx, loc.size());
  }
  const std::size_t d = loc.size();

  double lower = 0.0;
  if (k == 2) {
    std::vector<double> a(d * d, 0.0);
    for (const auto& [indices, alpha] : table) {
      const std::size_t u = loc.at(indices[0]);
      const std::size_t v = loc.at(indices[1]);
      a[u * d + v] = alpha;
      a[v * d + u] = alpha;
    }
    lower = jacobi_spectral_norm(std::move(a), d);
  } else {
    std::vector<SparseTuple> tuples;
    double weight = 0.0;
    for (const auto& [indices, alpha] : table) {
      SparseTuple tup;
      const WickMonomial mono{indices};
      tup.alpha_ord = alpha * static_cast<double>(ordering_count(monomial_groups(mono)));
      for (const auto& [idx, mult] : monomial_groups(mono))
        tup.groups.emplace_back(loc.at(idx), mult);
      weight += std::fabs(tup.alpha_ord);
      tuples.push_back(std::move(tup));
    }
    const double shift = static_cast<double>(k) * weight;
    std::vector<SparseTuple> negated = tuples;
    for (SparseTuple& tup : negated) tup.alpha_ord = -tup.alpha_ord;
    for (int run = 0; run < 8; ++run) {
      NormalStream stream(stream_seed(0x6e6f726d5b725dULL, static_cast<std::uint64_t>(run)));
      std::vector<double> x0(d);
      double nrm_sq = 0.0;
      for (std::size_t v = 0; v < d; ++v) {
        x0[v] = stream.next();
        nrm_sq += x0[v] * x0[v];
      }
      if (nrm_sq == 0.0) continue;
      const double nrm = std::sqrt(nrm_sq);
      for (double& v : x0) v /= nrm;
      lower = std::max(lower, std::fabs(shopm_run(tuples, k, x0, shift)));
      lower = std::max(lower, std::fabs(shopm_run(negated, k, x0, shift)));
    }
  }
  lower = std::min(lower, upper);
  return NormBracket{lower, upper};
}

double x_norm(const ChaosObservable& f, const CovarianceModel& cov) {
  const SymmetricCoefficients sym = symmetrize(f);
  KahanSum<double> sum;
  sum.add(observable_l2_sq(f, cov));
  for (const auto& [k, table] : sym.degrees) {
    (void)table;
    const NormBracket bracket = multilinear_norm(sym, k);
    sum.add(bracket.upper * bracket.upper);
  }
  return std::sqrt(sum.value());
}

double y_norm(const ChaosObservable& f, const CovarianceModel& cov) {
  const SymmetricCoefficients sym = symmetrize(f);
  double best = 0.0;
  for (const auto& [k, table] : sym.degrees) {
    (void)table;
    const NormBracket bracket = multilinear_norm(sym, k);
    best = std::max(best, factorial_d(k) * bracket.upper);
  }
  return std::sqrt(observable_l2_sq(f, cov)) + best;
}

PolyObservable make_poly(std::vector<int> vars, std::map<std::vector<int>, double> terms,
                         std::size_t dim) {
  check_indices(vars, dim, "make_poly");
  std::vector<int> sorted = vars;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("make_poly: duplicate variable");
  if (vars != sorted) throw std::invalid_argument("make_poly: variables must be sorted");
  PolyObservable p;
  p.vars = std::move(vars);
  for (auto& [expo, coeff] : terms) {
    if (expo.size() != p.vars.size())
      throw std::invalid_argument("make_poly: exponent arity mismatch");
    int total = 0;
    for (int e : expo) {
      if (e < 0) throw std::invalid_argument("make_poly: negative exponent");
      total += e;
    }
    if (total > kMaxDegree) throw std::invalid_argument("make_poly: degree exceeds 20");
    if (coeff != 0.0) p.terms.emplace(expo, coeff);
  }
  return p;
}

double poly_eval(const PolyObservable& p, const cvec& z) {
  std::vector<double> t(p.vars.size());
  for (std::size_t v = 0; v < p.vars.size(); ++v) t[v] = real_direction(p.vars[v], z);
  KahanSum<double> sum;
  for (const auto& [expo, coeff] : p.terms) {
    double prod = coeff;
    for (std::size_t v = 0; v < expo.size(); ++v) prod *= pow_int(t[v], expo[v]);
    sum.add(prod);
  }
  return sum.value();
}

double poly_derivative_eval(const PolyObservable& p, const cvec& z,
                            const std::vector<int>& dirs) {
  std::vector<int> order(p.vars.size(), 0);
  for (int dir : dirs) {
    const auto it = std::find(p.vars.begin(), p.vars.end(), dir);
    if (it == p.vars.end()) return 0.0;
    ++order[static_cast<std::size_t>(it - p.vars.begin())];
  }
  std::vector<double> t(p.vars.size());
  for (std::size_t v = 0; v < p.vars.size(); ++v) t[v] = real_direction(p.vars[v], z);
  KahanSum<double> sum;
  for (const auto& [expo, coeff] : p.terms) {
    double prod = coeff;
    for (std::size_t v = 0; v < expo.size() && prod != 0.0; ++v) {
      const int e = expo[v];
      const int r = order[v];
      if (r > e) {
        prod = 0.0;
        break;
      }
      for (int j = 0; j < r; ++j) prod *= static_cast<double>(e - j);
      prod *= pow_int(t[v], e - r);
    }
    sum.add(prod);
  }
  return sum.value();
}

ChaosObservable poly_to_chaos(const PolyObservable& p, const CovarianceModel& cov,
                              std::size_t dim) {
  check_indices(p.vars, dim, "poly_to_chaos");
  for (int var : p.vars) {
    if (!(cov.sigma[static_cast<std::size_t>(std::abs(var))] > 0.0))
      throw std::invalid_argument("poly_to_chaos: variable has zero sigma");
  }
  double degree0 = 0.0;
  std::map<std::vector<int>, double> merged;
  for (const auto& [expo, coeff] : p.terms) {
    // per-variable expansion t^e = sum_j beta_{e j} sigma^{e-j} :t^j:
    std::vector<std::pair<std::vector<int>, double>> partial{{std::vector<int>{}, coeff}};
    for (std::size_t v = 0; v < expo.size(); ++v) {
      const int e = expo[v];
      if (e == 0) continue;
      const int var = p.vars[v];
      const double sigma = cov.sigma[static_cast<std::size_t>(std::abs(var))];
      std::vector<std::pair<int, double>> options;
      for (int j = e; j >= 0; j -= 2) {
        const int mhalf = (e - j) / 2;
        double beta = factorial_d(e) / factorial_d(j);
        for (int i = 1; i <= mhalf; ++i) beta /= 2.0 * static_cast<double>(i);
        options.emplace_back(j, beta * pow_int(sigma, e - j));
      }
      std::vector<std::pair<std::vector<int>, double>> next;
      next.reserve(partial.size() * options.size());
      for (const auto& [indices, factor] : partial) {
        for (const auto& [j, opt_factor] : options) {
          std::vector<int> extended = indices;
          extended.insert(extended.end(), static_cast<std::size_t>(j), var);
          next.emplace_back(std::move(extended), factor * opt_factor);
        }
      }
      partial = std::move(next);
    }
    for (auto& [indices, factor] : partial) {
      if (indices.empty()) {
        degree0 += factor;
      } else {
        std::sort(indices.begin(), indices.end());
        merged[std::move(indices)] += factor;
      }
    }
  }
  std::vector<ChaosTerm> terms;
  for (const auto& [indices, coeff] : merged)
    terms.push_back(ChaosTerm{WickMonomial{indices}, coeff});
  return make_chaos_observable(dim, degree0, std::move(terms));
}

namespace {

void append_tuples(const std::vector<int>& vars, int k, std::size_t start,
                   std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (k == 0) {
    out.push_back(prefix);
    return;
  }
  for (std::size_t v = start; v < vars.size(); ++v) {
    prefix.push_back(vars[v]);
    append_tuples(vars, k - 1, v, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

CoeffCheckReport coeff_from_derivatives(const PolyObservable& p, const CovarianceModel& cov,
                                        std::uint64_t seed, std::size_t n_samples) {
  constexpr std::size_t kBatches = 32;
  if (n_samples < 1000)
    throw std::invalid_argument("coeff_from_derivatives: need at least 1000 samples");
  const std::size_t per_batch = n_samples / kBatches;
  const std::size_t dim = cov.sigma.size();
  const ChaosObservable chaos = poly_to_chaos(p, cov, dim);

  int max_degree = 0;
  for (const auto& [expo, coeff] : p.terms) {
    (void)coeff;
    int total = 0;
    for (int e : expo) total += e;
    max_degree = std::max(max_degree, total);
  }

  std::vector<std::vector<int>> tuples{std::vector<int>{}};
  for (int k = 1; k <= max_degree; ++k) {
    std::vector<int> prefix;
    append_tuples(p.vars, k, 0, prefix, tuples);
  }

  std::map<std::vector<int>, double> algebraic;
  algebraic[std::vector<int>{}] = chaos.degree0;
  for (const ChaosTerm& term : chaos.terms) algebraic[term.monomial.indices] = term.coeff;

  std::vector<double> fact_norm(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    double fact = 1.0;
    for (const auto& [idx, mult] : monomial_groups(WickMonomial{tuples[i]})) {
      (void)idx;
      for (int j = 2; j <= mult; ++j) fact *= j;
    }
    fact_norm[i] = fact;
  }

  // batch_means[tuple][batch]
  std::vector<std::vector<double>> batch_means(tuples.size(),
                                               std::vector<double>(kBatches, 0.0));
  parallel_for(kBatches, [&](std::size_t b) {
    SampleCursor cursor(cov, seed, b);
    cvec z(dim);
    std::vector<KahanSum<double>> acc(tuples.size());
    for (std::size_t s = 0; s < per_batch; ++s) {
      cursor.next(z);
      for (std::size_t i = 0; i < tuples.size(); ++i) {
        const double d = tuples[i].empty() ? poly_eval(p, z)
                                           : poly_derivative_eval(p, z, tuples[i]);
        acc[i].add(d / fact_norm[i]);
      }
    }
    for (std::size_t i = 0; i < tuples.size(); ++i)
      batch_means[i][b] = acc[i].value() / static_cast<double>(per_batch);
  });

  CoeffCheckReport report;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    CoeffCheckEntry entry;
    entry.tuple = tuples[i];
    const auto it = algebraic.find(tuples[i]);
    entry.algebraic = it == algebraic.end() ? 0.0 : it->second;
    KahanSum<double> mean_sum;
    for (double v : batch_means[i]) mean_sum.add(v);
    const double mean = mean_sum.value() / static_cast<double>(kBatches);
    KahanSum<double> var_sum;
    for (double v : batch_means[i]) var_sum.add((v - mean) * (v - mean));
    entry.mc_value = mean;
    entry.mc_stderr =
        std::sqrt(var_sum.value() / (kBatches - 1.0)) / std::sqrt(static_cast<double>(kBatches));
    report.by_degree[static_cast<int>(tuples[i].size())].push_back(std::move(entry));
  }
  return report;
}

}  // namespace mixlab
