#pragma once

#include <Eigen/Core>

#include <vector>

namespace eoslab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Least-squares instance: minimise 0.5 * (theta_1 * ... * theta_p - y)^2
// over theta in R^p, with p >= 2 factors and positive target y.
struct FactorisationProblem {
  int depth;      // p
  double target;  // y

  FactorisationProblem(int depth_, double target_);

  // Balanced solution y^(1/p) * 1_p, the sharpness minimiser on M.
  Vector balanced_point() const;
  // Sharpness at the balanced point: p * y^(2 - 2/p).
  double lambda_star() const;
};

double f(const FactorisationProblem& prob, const Vector& theta);

// Entry l is the product of all coordinates except the l-th.
Vector grad_f(const FactorisationProblem& prob, const Vector& theta);

// Off-diagonal (i, j): product of all coordinates except i and j; diagonal 0.
Matrix hess_f(const FactorisationProblem& prob, const Vector& theta);

// Third derivative tensor contracted once: M(i, j) = sum_k D3f_{ijk} z_k,
// where D3f_{ijk} is the product over the complement of {i, j, k} for
// distinct indices and 0 otherwise. Identically zero when p = 2.
Matrix d3f_apply(const FactorisationProblem& prob, const Vector& theta,
                 const Vector& z);

double d2f_contract(const FactorisationProblem& prob, const Vector& theta,
                    const Vector& u, const Vector& v);
double d3f_contract(const FactorisationProblem& prob, const Vector& theta,
                    const Vector& u, const Vector& v, const Vector& w);

// Dispatcher over the supported tensor orders {2, 3}; directions are either
// one vector (repeated) or exactly `order` vectors.
double deriv_tensor_contract(const FactorisationProblem& prob,
                             const Vector& theta, int order,
                             const std::vector<Vector>& dirs);

double loss(const FactorisationProblem& prob, const Vector& theta);
Vector grad_loss(const FactorisationProblem& prob, const Vector& theta);

// True when all coordinates are positive and the product matches the target
// to 1e-10 relative.
bool is_on_manifold(const FactorisationProblem& prob, const Vector& theta);
void require_on_manifold(const FactorisationProblem& prob, const Vector& theta,
                         const char* who);

// Largest eigenvalue of the loss Hessian on M, equal to |grad f|^2.
double sharpness(const FactorisationProblem& prob, const Vector& theta_par);

// Unit normal grad f / |grad f| at an on-manifold point.
Vector normal(const FactorisationProblem& prob, const Vector& theta_par);

// Normal contractions of the loss derivatives restricted to M:
//   dl3_n = D3l[n,n,n] = 3 * D2f[n,n] * <Df, n>
//   dl4_n = D4l[n,n,n,n] = 4 * D3f[n,n,n] * <Df, n> + 3 * D2f[n,n]^2
double dl3_n(const FactorisationProblem& prob, const Vector& theta_par);
double dl4_n(const FactorisationProblem& prob, const Vector& theta_par);

// Genericity coefficient c(eta, theta_par) =
//   ((eta/2) * dl3_n)^2 - (eta/6) * dl4_n.
double c_coeff(const FactorisationProblem& prob, double eta,
               const Vector& theta_par);

// Closed form of c(2/lambda*, theta*):
//   (32/p^3 * C(p,2)^2 - 8/p^2 * C(p,3)) * y^(-2/p).
double c_star_closed_form(const FactorisationProblem& prob);

}  // namespace eoslab
