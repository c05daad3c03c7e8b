#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "mixlab/common.hpp"

namespace mixlab {

enum class FieldKind { monomial, kalisch, custom };

// A unimodular eigenvector field truncated to `dim` coordinates.  eval_field
// returns the coordinate vector of E(e^{i theta}).  Monomial kind stores the
// coefficients c_k of E(lambda) = sum_k c_k lambda^k e_k; the other kinds hold
// a pure evaluator theta -> coordinates.
struct EigenvectorField {
  std::size_t dim = 0;
  FieldKind kind = FieldKind::monomial;
  std::vector<cd> coeffs;
  std::function<cvec(double)> evaluator;
  // Declared Holder exponent of theta -> E(e^{i theta}), when the family
  // provides one; estimators never read it.
  std::optional<double> holder_alpha;
  // Upper bound on the discarded coefficient mass sum_{k >= dim} |c_k|^2;
  // +inf when the full-space field is not square-summable.
  double tail_sq_bound = std::numeric_limits<double>::infinity();
  // Construction metadata (serialization + operator assembly).
  std::string family = "custom";
  double kappa = 0.0;
  cd w{};
  double scale = 1.0;  // cumulative pointwise rescaling applied after construction
};

// Backward-shift family: c_0 = 1, c_k = k^-kappa.  Stores alpha = kappa - 1/2
// for 1/2 < kappa <= 3/2, alpha = 1 for kappa > 3/2, none for kappa <= 1/2.
EigenvectorField make_weighted_shift_field(double kappa, std::size_t dim);

// Scaled-shift family, |w| > 1: c_k = w^-k.
EigenvectorField make_analytic_field(cd w, std::size_t dim);

// Indicator field E(e^{i alpha}) = 1_(alpha, 2pi) in L^2([0, 2pi], dtheta/2pi),
// expanded over the exponential basis enumerated 0, +1, -1, +2, -2, ...
// Experimental: the basis does not diagonalize the covariance and the
// operator truncation is gated by eigen_residual.
EigenvectorField make_kalisch_field(std::size_t dim);

EigenvectorField make_custom_field(std::function<cvec(double)> evaluator, std::size_t dim,
                                   std::optional<double> declared_alpha = std::nullopt,
                                   double tail_sq_bound = std::numeric_limits<double>::infinity());

cvec eval_field(const EigenvectorField& field, double theta);

// ||E||_2^2 = integral of ||E(e^{i theta})||^2 over the circle.  Exact sum for
// monomial kind; uniform quadrature otherwise (quad_nodes = 0 picks a default).
double field_norm_sq(const EigenvectorField& field, std::size_t quad_nodes = 0);

// ||E(e^{i theta1}) - E(e^{i theta2})||.  Monomial kind uses the rotation
// reduction (the gap depends only on theta1 - theta2).
double pairwise_gap(const EigenvectorField& field, double theta1, double theta2);

struct HolderGrid {
  double theta_min = 0.0;
  double theta_max = 0.0;
  int points = 0;
};

// Geometric grid on [max(1e-3, 10/dim), 0.3] with 24 points.  The lower cutoff
// keeps truncation error subdominant at the smallest gap.
HolderGrid default_holder_grid(const EigenvectorField& field);

struct HolderEstimate {
  double alpha_hat = 0.0;
  double c_hat = 0.0;
  double r_squared = 0.0;
  std::vector<double> thetas;
  std::vector<double> gaps;
};

// Log-log fit of pairwise_gap(theta, 0) against theta over a geometric grid.
HolderEstimate holder_estimate(const EigenvectorField& field, const HolderGrid& grid);
HolderEstimate holder_estimate(const EigenvectorField& field);

// Pointwise rescaling E -> s E (same operator eigen-equation, covariance
// scales by s): used to bring ||E||_2 below 1 for the aggregate bound.
EigenvectorField scale_field(const EigenvectorField& field, double s);
EigenvectorField normalize_field(const EigenvectorField& field, double target_norm_sq = 0.5);

}  // namespace mixlab
