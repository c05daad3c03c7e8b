#pragma once

#include "mixlab/field.hpp"

namespace mixlab {

enum class OperatorKind { weighted_shift, matrix };

// Truncation of the operator to the first `dim` coordinates.  Shift kind:
// (Tx)_k = weights[k] * x_{k+1}, weights[k] = c_k / c_{k+1} for monomial
// fields.  Matrix kind: dense row-major complex matrix.
struct OperatorModel {
  std::size_t dim = 0;
  OperatorKind kind = OperatorKind::weighted_shift;
  std::vector<cd> weights;
  std::vector<cd> matrix;
};

OperatorModel make_operator(const EigenvectorField& field);

cvec apply(const OperatorModel& op, const cvec& x);
cvec apply_adjoint(const OperatorModel& op, const cvec& x);
cvec apply_power(const OperatorModel& op, const cvec& x, long long n);
cvec apply_adjoint_power(const OperatorModel& op, const cvec& x, long long n);
// T^n e_k without materializing e_k.
cvec basis_column_power(const OperatorModel& op, std::size_t k, long long n);

// Diagonal covariance data: coordinate k of a sample is sigma[k]*(xi + i eta)
// with xi, eta independent standard normals, so E|<e_k, x>|^2 = 2 sigma_k^2.
struct CovarianceModel {
  std::vector<double> sigma;
};

// sigma_k = |c_k| / sqrt(2) in closed form for monomial fields (quad_nodes = 0);
// quadrature of (1/2) * integral |<e_k, E>|^2 otherwise or when quad_nodes > 0.
CovarianceModel sigma_from_field(const EigenvectorField& field, std::size_t quad_nodes = 0);

double sum_sigma_sq(const CovarianceModel& cov);
double sum_sigma_4(const CovarianceModel& cov);

// <R T*^n x, y> = integral lambda^n <x,E(lambda)> conj(<y,E(lambda)>) dmu,
// by uniform quadrature with M >= 2 dim + n nodes (exact when the integrand
// is a trigonometric polynomial, i.e. for monomial fields).
cd corr_linear(const EigenvectorField& field, const cvec& x, const cvec& y, long long n,
               std::size_t quad_nodes = 0);
// All orders 0..n_max from one set of integrand samples.
std::vector<cd> corr_linear_batch(const EigenvectorField& field, const cvec& x, const cvec& y,
                                  long long n_max, std::size_t quad_nodes = 0);

// Same quantity through coordinates: sum_k 2 sigma_k^2 conj((T*^n x)_k) y_k.
cd corr_linear_direct(const OperatorModel& op, const CovarianceModel& cov, const cvec& x,
                      const cvec& y, long long n);

// || T E(e^{i theta}) - e^{i theta} E(e^{i theta}) ||; reports how much the
// truncation breaks the eigenvector equation.
double eigen_residual(const EigenvectorField& field, const OperatorModel& op, double theta);

}  // namespace mixlab
