#include "mixlab/field.hpp"

#include <algorithm>
#include <cmath>

namespace mixlab {

namespace {

void check_dim(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("field: dim must be >= 2");
}

std::size_t default_nodes(const EigenvectorField& field) {
  return std::max<std::size_t>(512, 2 * field.dim);
}

}  // namespace

EigenvectorField make_weighted_shift_field(double kappa, std::size_t dim) {
  check_dim(dim);
  if (!(kappa > 0.0)) throw std::invalid_argument("weighted_shift_field: kappa must be > 0");
  EigenvectorField f;
  f.dim = dim;
  f.kind = FieldKind::monomial;
  f.coeffs.resize(dim);
  f.coeffs[0] = 1.0;
  for (std::size_t k = 1; k < dim; ++k)
    f.coeffs[k] = std::pow(static_cast<double>(k), -kappa);
  if (kappa > 0.5) {
    f.holder_alpha = kappa <= 1.5 ? kappa - 0.5 : 1.0;
    // sum_{k >= dim} k^-2kappa <= integral_{dim-1}^inf t^-2kappa dt
    f.tail_sq_bound =
        std::pow(static_cast<double>(dim - 1), 1.0 - 2.0 * kappa) / (2.0 * kappa - 1.0);
  }
  f.family = "weighted_shift";
  f.kappa = kappa;
  return f;
}

EigenvectorField make_analytic_field(cd w, std::size_t dim) {
  check_dim(dim);
  double aw = std::abs(w);
  if (!(aw > 1.0)) throw std::invalid_argument("analytic_field: |w| must be > 1");
  EigenvectorField f;
  f.dim = dim;
  f.kind = FieldKind::monomial;
  f.coeffs.resize(dim);
  cd inv = 1.0 / w;
  cd p = 1.0;
  for (std::size_t k = 0; k < dim; ++k) {
    f.coeffs[k] = p;
    p *= inv;
  }
  f.holder_alpha = 1.0;
  double q = 1.0 / (aw * aw);
  f.tail_sq_bound = std::pow(q, static_cast<double>(dim)) / (1.0 - q);
  f.family = "analytic";
  f.w = w;
  return f;
}

EigenvectorField make_kalisch_field(std::size_t dim) {
  check_dim(dim);
  EigenvectorField f;
  f.dim = dim;
  f.kind = FieldKind::kalisch;
  f.evaluator = [dim](double theta) {
    // Coordinate p holds the exponential-basis coefficient of frequency
    // n(p): 0, +1, -1, +2, -2, ...
    theta = theta - kTwoPi * std::floor(theta / kTwoPi);
    cvec out(dim);
    out[0] = (kTwoPi - theta) / kTwoPi;
    for (std::size_t p = 1; p < dim; ++p) {
      long long n = (p % 2 == 1) ? static_cast<long long>((p + 1) / 2)
                                 : -static_cast<long long>(p / 2);
      cd num = std::polar(1.0, -static_cast<double>(n) * theta) - cd{1.0, 0.0};
      out[p] = num / (kTwoPi * cd{0.0, static_cast<double>(n)});
    }
    return out;
  };
  f.holder_alpha = 0.5;
  // |coeff_n|^2 <= 1/(pi n)^2 and sum_{|n| > J} 1/n^2 <= 2/J with
  // J = floor((dim-1)/2), the frequency range both signs certainly cover.
  std::size_t top_freq = std::max<std::size_t>(1, (dim - 1) / 2);
  f.tail_sq_bound = 2.0 / (kPi * kPi * static_cast<double>(top_freq));
  f.family = "kalisch";
  return f;
}

EigenvectorField make_custom_field(std::function<cvec(double)> evaluator, std::size_t dim,
                                   std::optional<double> declared_alpha, double tail_sq_bound) {
  check_dim(dim);
  if (!evaluator) throw std::invalid_argument("custom_field: evaluator required");
  EigenvectorField f;
  f.dim = dim;
  f.kind = FieldKind::custom;
  f.evaluator = std::move(evaluator);
  f.holder_alpha = declared_alpha;
  f.tail_sq_bound = tail_sq_bound;
  f.family = "custom";
  return f;
}

cvec eval_field(const EigenvectorField& field, double theta) {
  if (field.kind == FieldKind::monomial) {
    cvec out(field.dim);
    cd lambda = std::polar(1.0, theta);
    cd p = 1.0;
    for (std::size_t k = 0; k < field.dim; ++k) {
      out[k] = field.coeffs[k] * p;
      p *= lambda;
    }
    return out;
  }
  cvec out = field.evaluator(theta);
  if (out.size() != field.dim) throw std::runtime_error("field evaluator: wrong dimension");
  return out;
}

double field_norm_sq(const EigenvectorField& field, std::size_t quad_nodes) {
  if (field.kind == FieldKind::monomial && quad_nodes == 0) {
    KahanSum<double> acc;
    for (const cd& c : field.coeffs) acc.add(std::norm(c));
    return acc.value();
  }
  std::size_t m = quad_nodes == 0 ? default_nodes(field) : quad_nodes;
  KahanSum<double> acc;
  for (std::size_t j = 0; j < m; ++j)
    acc.add(norm_sq(eval_field(field, kTwoPi * static_cast<double>(j) / static_cast<double>(m))));
  return acc.value() / static_cast<double>(m);
}

double pairwise_gap(const EigenvectorField& field, double theta1, double theta2) {
  if (field.kind == FieldKind::monomial) {
    // ||E(e^{i t1}) - E(e^{i t2})||^2 = sum 4 |c_k|^2 sin^2(k (t1-t2) / 2)
    double d = theta1 - theta2;
    KahanSum<double> acc;
    for (std::size_t k = 0; k < field.dim; ++k) {
      double s = std::sin(0.5 * static_cast<double>(k) * d);
      acc.add(4.0 * std::norm(field.coeffs[k]) * s * s);
    }
    return std::sqrt(acc.value());
  }
  cvec a = eval_field(field, theta1);
  cvec b = eval_field(field, theta2);
  double acc = 0.0;
  for (std::size_t k = 0; k < field.dim; ++k) acc += std::norm(a[k] - b[k]);
  return std::sqrt(acc);
}

HolderGrid default_holder_grid(const EigenvectorField& field) {
  HolderGrid g;
  g.theta_min = std::max(1e-3, 10.0 / static_cast<double>(field.dim));
  g.theta_max = 0.3;
  g.points = 24;
  return g;
}

HolderEstimate holder_estimate(const EigenvectorField& field, const HolderGrid& grid) {
  if (grid.points < 4) throw std::invalid_argument("holder_estimate: need >= 4 grid points");
  if (!(grid.theta_min > 0.0) || !(grid.theta_max > grid.theta_min) || grid.theta_max > kPi)
    throw std::invalid_argument("holder_estimate: need 0 < theta_min < theta_max <= pi");
  if (field.kind == FieldKind::monomial && grid.theta_min < 10.0 / static_cast<double>(field.dim))
    throw std::invalid_argument(
        "holder_estimate: theta_min below 10/dim, gap dominated by truncation");
  HolderEstimate est;
  est.thetas.resize(grid.points);
  est.gaps.resize(grid.points);
  double ratio = std::log(grid.theta_max / grid.theta_min) / (grid.points - 1);
  std::vector<double> lx(grid.points), ly(grid.points);
  for (int i = 0; i < grid.points; ++i) {
    double theta = grid.theta_min * std::exp(ratio * i);
    double gap = pairwise_gap(field, theta, 0.0);
    if (!(gap > 0.0)) throw std::runtime_error("holder_estimate: zero gap on grid");
    est.thetas[i] = theta;
    est.gaps[i] = gap;
    lx[i] = std::log(theta);
    ly[i] = std::log(gap);
  }
  LineFit f = fit_line(lx, ly);
  est.alpha_hat = f.slope;
  est.c_hat = std::exp(f.intercept);
  est.r_squared = f.r_squared;
  return est;
}

HolderEstimate holder_estimate(const EigenvectorField& field) {
  return holder_estimate(field, default_holder_grid(field));
}

EigenvectorField scale_field(const EigenvectorField& field, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("scale_field: s must be > 0");
  EigenvectorField f = field;
  if (f.kind == FieldKind::monomial) {
    for (cd& c : f.coeffs) c *= s;
  } else {
    auto base = field.evaluator;
    f.evaluator = [base, s](double theta) {
      cvec v = base(theta);
      for (cd& c : v) c *= s;
      return v;
    };
  }
  f.tail_sq_bound = field.tail_sq_bound * s * s;
  f.scale = field.scale * s;
  return f;
}

EigenvectorField normalize_field(const EigenvectorField& field, double target_norm_sq) {
  double total = field_norm_sq(field);
  if (std::isfinite(field.tail_sq_bound)) total += field.tail_sq_bound;
  return scale_field(field, std::sqrt(target_norm_sq / total));
}

}  // namespace mixlab
