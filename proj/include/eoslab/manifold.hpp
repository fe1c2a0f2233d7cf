#pragma once

#include "eoslab/problem.hpp"

#include <vector>

namespace eoslab {

// Nearest-point coordinates for a tubular neighbourhood of M: the projection
// theta_par on M and the signed offset theta_perp along the unit normal.
struct TubeCoords {
  Vector theta_par;
  double theta_perp = 0.0;
};

struct ProjectionResult {
  Vector point;
  double alpha = 0.0;      // KKT multiplier at the solution
  bool degenerate = false; // nearest point non-unique to second order
};

// Closed-form geometry of the sharpness along M.
struct GeometryConstants {
  double lambda_star = 0.0;  // p * y^(2 - 2/p)
  double nu = 0.0;           // 4 * y^(2 - 4/p), Hessian of lambda at theta*
  double mu = 0.0;           // strong-convexity constant on the ball
  double ball_radius = 0.0;  // geodesic ball radius (inf when p = 2)
  double exact_radius = 0.0; // y^(1/p) (4pi + 1 - sqrt(16pi + 1)) / (16pi - 8)
  double c_star = 0.0;       // c(2/lambda*, theta*)
  double lipschitz = 0.0;    // sampled gradient-Lipschitz estimate for lambda
};

// KKT projection onto the positive branch of M: solve
//   min |q - theta|^2  s.t.  prod q_i = y,  q > 0
// via the per-coordinate quadratic q_i(alpha) = (theta_i +- sqrt(theta_i^2 -
// 4 alpha y)) / 2 with a uniform sign and bisection on the monotone product.
ProjectionResult project_full(const FactorisationProblem& prob,
                              const Vector& theta);
Vector project(const FactorisationProblem& prob, const Vector& theta);

TubeCoords tube_coords(const FactorisationProblem& prob, const Vector& theta);
Vector reconstruct(const FactorisationProblem& prob, const TubeCoords& tube);

// Tangentially projected gradient of lambda = |grad f|^2:
//   (I - n n^T) (2 hess_f grad_f).
Vector riem_grad_lambda(const FactorisationProblem& prob,
                        const Vector& theta_par);

// Riemannian Hessian of lambda on M via the hypersurface formula
//   2 P (D3f[grad f] + (hess f)^2 - <n, hess f n> hess f) P,  P = I - n n^T.
Matrix riem_hess_lambda(const FactorisationProblem& prob,
                        const Vector& theta_par);

// Scalar-factorisation closed form of the same Hessian, with v_i = 1/theta_i,
// s1 = sum v^2, s2 = sum v^4:
//   p > 2: 2 y^2 P (3 diag(v^4) - (s2/s1) diag(v^2)) P
//   p = 2: 2 y^2 P (diag(v^4) + (s1 - s2/s1) diag(v^2)) P
Matrix riem_hess_lambda_closed(const FactorisationProblem& prob,
                               const Vector& theta_par);

// Orthonormal basis of the tangent space at theta_par, as columns of a
// p x (p-1) matrix.
Matrix tangent_basis(const FactorisationProblem& prob, const Vector& theta_par);

// Eigenvalues of the restriction of H to the tangent space, ascending.
std::vector<double> tangent_eigenvalues(const FactorisationProblem& prob,
                                        const Vector& theta_par,
                                        const Matrix& H);

// Deterministic on-manifold sample within Euclidean distance `radius` of the
// balanced point, obtained by projecting tangent perturbations.
std::vector<Vector> sample_near(const FactorisationProblem& prob,
                                double radius, int count, unsigned long seed);

// Closed-form constants plus a sampled Lipschitz estimate (max tangent
// eigenvalue of the Hessian over `lipschitz_samples` draws in the ball).
GeometryConstants geometry_constants(const FactorisationProblem& prob,
                                     int lipschitz_samples = 200,
                                     unsigned long seed = 0);

}  // namespace eoslab
