#include "mixlab/model.hpp"

#include <algorithm>
#include <cmath>

#include "mixlab/quadrature.hpp"

namespace mixlab {

namespace {

long long freq_of_coord(std::size_t p) {
  if (p == 0) return 0;
  return (p % 2 == 1) ? static_cast<long long>((p + 1) / 2) : -static_cast<long long>(p / 2);
}

std::size_t coord_of_freq(long long n) {
  if (n == 0) return 0;
  return n > 0 ? static_cast<std::size_t>(2 * n - 1) : static_cast<std::size_t>(-2 * n);
}

OperatorModel kalisch_operator(std::size_t dim) {
  OperatorModel op;
  op.dim = dim;
  op.kind = OperatorKind::matrix;
  op.matrix.assign(dim * dim, cd{0.0, 0.0});
  auto at = [&](std::size_t row, std::size_t col) -> cd& { return op.matrix[row * dim + col]; };
  for (std::size_t p = 0; p < dim; ++p) {
    long long n = freq_of_coord(p);
    if (n != -1) {
      // T phi_n = (n/(n+1)) phi_{n+1} + (1/(n+1)) phi_0
      double np1 = static_cast<double>(n + 1);
      std::size_t up = coord_of_freq(n + 1);
      if (up < dim) at(up, p) += static_cast<double>(n) / np1;
      at(0, p) += 1.0 / np1;
    } else {
      // T phi_{-1} = (1 - i pi) phi_0 + sum_{m != 0} (1/m) phi_m
      at(0, p) += cd{1.0, -kPi};
      for (std::size_t q = 1; q < dim; ++q)
        at(q, p) += 1.0 / static_cast<double>(freq_of_coord(q));
    }
  }
  return op;
}

void check_vec(const OperatorModel& op, const cvec& x) {
  if (x.size() != op.dim) throw std::invalid_argument("operator: vector size mismatch");
}

void check_order(long long n) {
  if (n < 0) throw std::invalid_argument("operator: power must be >= 0");
}

struct SparseVec {
  std::vector<std::size_t> idx;
  std::vector<cd> val;
};

SparseVec sparsify(const cvec& x) {
  SparseVec s;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] != cd{0.0, 0.0}) {
      s.idx.push_back(k);
      s.val.push_back(x[k]);
    }
  return s;
}

std::size_t required_nodes(std::size_t dim, long long n_max) {
  return 2 * dim + static_cast<std::size_t>(n_max);
}

// Samples of g(lambda_j) = <x, E(lambda_j)> conj(<y, E(lambda_j)>).
std::vector<cd> integrand_samples(const EigenvectorField& field, const cvec& x, const cvec& y,
                                  const CircleQuadrature& quad) {
  std::vector<cd> g(quad.nodes());
  if (field.kind == FieldKind::monomial) {
    SparseVec sx = sparsify(x);
    SparseVec sy = sparsify(y);
    for (std::size_t j = 0; j < quad.nodes(); ++j) {
      cd fx{0.0, 0.0};
      for (std::size_t t = 0; t < sx.idx.size(); ++t)
        fx += std::conj(sx.val[t]) * field.coeffs[sx.idx[t]] *
              quad.unit_power(j, static_cast<long long>(sx.idx[t]));
      cd fy{0.0, 0.0};
      for (std::size_t t = 0; t < sy.idx.size(); ++t)
        fy += std::conj(sy.val[t]) * field.coeffs[sy.idx[t]] *
              quad.unit_power(j, static_cast<long long>(sy.idx[t]));
      g[j] = fx * std::conj(fy);
    }
  } else {
    for (std::size_t j = 0; j < quad.nodes(); ++j) {
      cvec e = eval_field(field, quad.theta(j));
      g[j] = inner(x, e) * std::conj(inner(y, e));
    }
  }
  return g;
}

}  // namespace

OperatorModel make_operator(const EigenvectorField& field) {
  if (field.kind == FieldKind::kalisch) return kalisch_operator(field.dim);
  if (field.kind != FieldKind::monomial)
    throw std::invalid_argument("make_operator: no operator form for custom fields");
  OperatorModel op;
  op.dim = field.dim;
  op.kind = OperatorKind::weighted_shift;
  op.weights.resize(field.dim - 1);
  for (std::size_t k = 0; k + 1 < field.dim; ++k) {
    if (field.coeffs[k + 1] == cd{0.0, 0.0})
      throw std::invalid_argument("make_operator: vanishing coefficient");
    op.weights[k] = field.coeffs[k] / field.coeffs[k + 1];
  }
  return op;
}

cvec apply(const OperatorModel& op, const cvec& x) {
  check_vec(op, x);
  cvec y(op.dim, cd{0.0, 0.0});
  if (op.kind == OperatorKind::weighted_shift) {
    for (std::size_t k = 0; k + 1 < op.dim; ++k) y[k] = op.weights[k] * x[k + 1];
  } else {
    for (std::size_t r = 0; r < op.dim; ++r) {
      cd acc{0.0, 0.0};
      const cd* row = &op.matrix[r * op.dim];
      for (std::size_t c = 0; c < op.dim; ++c) acc += row[c] * x[c];
      y[r] = acc;
    }
  }
  return y;
}

cvec apply_adjoint(const OperatorModel& op, const cvec& x) {
  check_vec(op, x);
  cvec y(op.dim, cd{0.0, 0.0});
  if (op.kind == OperatorKind::weighted_shift) {
    for (std::size_t k = 0; k + 1 < op.dim; ++k) y[k + 1] = std::conj(op.weights[k]) * x[k];
  } else {
    for (std::size_t c = 0; c < op.dim; ++c) {
      cd acc{0.0, 0.0};
      for (std::size_t r = 0; r < op.dim; ++r) acc += std::conj(op.matrix[r * op.dim + c]) * x[r];
      y[c] = acc;
    }
  }
  return y;
}

cvec apply_power(const OperatorModel& op, const cvec& x, long long n) {
  check_vec(op, x);
  check_order(n);
  if (op.kind == OperatorKind::weighted_shift && n >= static_cast<long long>(op.dim))
    return cvec(op.dim, cd{0.0, 0.0});
  cvec y = x;
  for (long long i = 0; i < n; ++i) y = mixlab::apply(op, y);
  return y;
}

cvec apply_adjoint_power(const OperatorModel& op, const cvec& x, long long n) {
  check_vec(op, x);
  check_order(n);
  if (op.kind == OperatorKind::weighted_shift && n >= static_cast<long long>(op.dim))
    return cvec(op.dim, cd{0.0, 0.0});
  cvec y = x;
  for (long long i = 0; i < n; ++i) y = apply_adjoint(op, y);
  return y;
}

cvec basis_column_power(const OperatorModel& op, std::size_t k, long long n) {
  if (k >= op.dim) throw std::invalid_argument("basis_column_power: index out of range");
  check_order(n);
  if (op.kind == OperatorKind::weighted_shift) {
    cvec y(op.dim, cd{0.0, 0.0});
    if (static_cast<long long>(k) - n < 0) return y;
    cd p{1.0, 0.0};
    // T^n e_k = w_k w_{k-1} ... w_{k-n+1} e_{k-n} in 1-based weight labels;
    // weights[j] multiplies the step j+1 -> j.
    for (long long j = static_cast<long long>(k) - 1; j >= static_cast<long long>(k) - n; --j)
      p *= op.weights[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(static_cast<long long>(k) - n)] = p;
    return y;
  }
  cvec y(op.dim, cd{0.0, 0.0});
  y[k] = 1.0;
  for (long long i = 0; i < n; ++i) y = mixlab::apply(op, y);
  return y;
}

CovarianceModel sigma_from_field(const EigenvectorField& field, std::size_t quad_nodes) {
  CovarianceModel cov;
  cov.sigma.resize(field.dim);
  if (field.kind == FieldKind::monomial && quad_nodes == 0) {
    for (std::size_t k = 0; k < field.dim; ++k)
      cov.sigma[k] = std::abs(field.coeffs[k]) / std::sqrt(2.0);
    return cov;
  }
  std::size_t m = quad_nodes == 0 ? std::max<std::size_t>(512, 2 * field.dim) : quad_nodes;
  std::vector<KahanSum<double>> acc(field.dim);
  for (std::size_t j = 0; j < m; ++j) {
    cvec e = eval_field(field, kTwoPi * static_cast<double>(j) / static_cast<double>(m));
    for (std::size_t k = 0; k < field.dim; ++k) acc[k].add(std::norm(e[k]));
  }
  for (std::size_t k = 0; k < field.dim; ++k)
    cov.sigma[k] = std::sqrt(0.5 * acc[k].value() / static_cast<double>(m));
  return cov;
}

double sum_sigma_sq(const CovarianceModel& cov) {
  double acc = 0.0;
  for (double s : cov.sigma) acc += s * s;
  return acc;
}

double sum_sigma_4(const CovarianceModel& cov) {
  double acc = 0.0;
  for (double s : cov.sigma) acc += s * s * s * s;
  return acc;
}

cd corr_linear(const EigenvectorField& field, const cvec& x, const cvec& y, long long n,
               std::size_t quad_nodes) {
  if (x.size() != field.dim || y.size() != field.dim)
    throw std::invalid_argument("corr_linear: vector size mismatch");
  check_order(n);
  std::size_t need = required_nodes(field.dim, n);
  std::size_t m = quad_nodes == 0 ? need : quad_nodes;
  if (m < need)
    throw std::invalid_argument("corr_linear: quadrature too coarse, need at least " +
                                std::to_string(need) + " nodes");
  CircleQuadrature quad(m);
  std::vector<cd> g = integrand_samples(field, x, y, quad);
  return quad.moment(g, n);
}

std::vector<cd> corr_linear_batch(const EigenvectorField& field, const cvec& x, const cvec& y,
                                  long long n_max, std::size_t quad_nodes) {
  if (x.size() != field.dim || y.size() != field.dim)
    throw std::invalid_argument("corr_linear_batch: vector size mismatch");
  check_order(n_max);
  std::size_t need = required_nodes(field.dim, n_max);
  std::size_t m = quad_nodes == 0 ? need : quad_nodes;
  if (m < need)
    throw std::invalid_argument("corr_linear_batch: quadrature too coarse, need at least " +
                                std::to_string(need) + " nodes");
  CircleQuadrature quad(m);
  std::vector<cd> g = integrand_samples(field, x, y, quad);
  std::vector<cd> out(static_cast<std::size_t>(n_max) + 1);
  for (long long n = 0; n <= n_max; ++n)
    out[static_cast<std::size_t>(n)] = quad.moment(g, n);
  return out;
}

cd corr_linear_direct(const OperatorModel& op, const CovarianceModel& cov, const cvec& x,
                      const cvec& y, long long n) {
  check_vec(op, x);
  check_vec(op, y);
  if (cov.sigma.size() != op.dim) throw std::invalid_argument("corr_linear_direct: cov mismatch");
  cvec u = apply_adjoint_power(op, x, n);
  KahanSum<cd> acc;
  for (std::size_t k = 0; k < op.dim; ++k)
    acc.add(2.0 * cov.sigma[k] * cov.sigma[k] * std::conj(u[k]) * y[k]);
  return acc.value();
}

double eigen_residual(const EigenvectorField& field, const OperatorModel& op, double theta) {
  if (op.dim != field.dim) throw std::invalid_argument("eigen_residual: dim mismatch");
  cvec e = eval_field(field, theta);
  cvec te = mixlab::apply(op, e);
  cd lambda = std::polar(1.0, theta);
  double acc = 0.0;
  for (std::size_t k = 0; k < field.dim; ++k) acc += std::norm(te[k] - lambda * e[k]);
  return std::sqrt(acc);
}

}  // namespace mixlab
