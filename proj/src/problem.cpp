#include "eoslab/problem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eoslab {

namespace {

void require_length(const FactorisationProblem& prob, const Vector& theta,
                    const char* who) {
  if (theta.size() != prob.depth) {
    std::ostringstream os;
    os << who << ": expected vector of length " << prob.depth << ", got "
       << theta.size();
    throw std::invalid_argument(os.str());
  }
}

// Product over all coordinates outside {skip1, skip2, skip3}; pass -1 to
// disable a slot. Left-to-right so permutation-symmetric inputs give
// bit-identical entries.
double prod_excluding(const Vector& theta, int skip1, int skip2 = -1,
                      int skip3 = -1) {
  double prod = 1.0;
  for (int i = 0; i < theta.size(); ++i) {
    if (i == skip1 || i == skip2 || i == skip3) continue;
    prod *= theta[i];
  }
  return prod;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

FactorisationProblem::FactorisationProblem(int depth_, double target_)
    : depth(depth_), target(target_) {
  if (depth < 2) throw std::invalid_argument("depth must be at least 2");
  if (!(target > 0.0)) throw std::invalid_argument("target must be positive");
}

Vector FactorisationProblem::balanced_point() const {
  return Vector::Constant(depth, std::pow(target, 1.0 / depth));
}

double FactorisationProblem::lambda_star() const {
  return depth * std::pow(target, 2.0 - 2.0 / depth);
}

double f(const FactorisationProblem& prob, const Vector& theta) {
  require_length(prob, theta, "f");
  return prod_excluding(theta, -1);
}

Vector grad_f(const FactorisationProblem& prob, const Vector& theta) {
  require_length(prob, theta, "grad_f");
  Vector g(theta.size());
  for (int l = 0; l < theta.size(); ++l) g[l] = prod_excluding(theta, l);
  return g;
}

Matrix hess_f(const FactorisationProblem& prob, const Vector& theta) {
  require_length(prob, theta, "hess_f");
  const int p = static_cast<int>(theta.size());
  Matrix H = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      H(i, j) = prod_excluding(theta, i, j);
    }
  return H;
}

Matrix d3f_apply(const FactorisationProblem& prob, const Vector& theta,
                 const Vector& z) {
  require_length(prob, theta, "d3f_apply");
  require_length(prob, z, "d3f_apply");
  const int p = static_cast<int>(theta.size());
  Matrix M = Matrix::Zero(p, p);
  if (p == 2) return M;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (int k = 0; k < p; ++k) {
        if (k == i || k == j) continue;
        s += z[k] * prod_excluding(theta, i, j, k);
      }
      M(i, j) = s;
    }
  return M;
}

double d2f_contract(const FactorisationProblem& prob, const Vector& theta,
                    const Vector& u, const Vector& v) {
  require_length(prob, u, "d2f_contract");
  require_length(prob, v, "d2f_contract");
  return u.dot(hess_f(prob, theta) * v);
}

double d3f_contract(const FactorisationProblem& prob, const Vector& theta,
                    const Vector& u, const Vector& v, const Vector& w) {
  require_length(prob, u, "d3f_contract");
  require_length(prob, w, "d3f_contract");
  return u.dot(d3f_apply(prob, theta, w) * v);
}

double deriv_tensor_contract(const FactorisationProblem& prob,
                             const Vector& theta, int order,
                             const std::vector<Vector>& dirs) {
  if (order != 2 && order != 3)
    throw std::invalid_argument("deriv_tensor_contract: unsupported order");
  if (dirs.empty() ||
      (dirs.size() != 1 && dirs.size() != static_cast<size_t>(order)))
    throw std::invalid_argument(
        "deriv_tensor_contract: need one direction or one per order");
  auto dir = [&](int k) -> const Vector& {
    return dirs.size() == 1 ? dirs[0] : dirs[static_cast<size_t>(k)];
  };
  if (order == 2) return d2f_contract(prob, theta, dir(0), dir(1));
  return d3f_contract(prob, theta, dir(0), dir(1), dir(2));
}

double loss(const FactorisationProblem& prob, const Vector& theta) {
  const double r = f(prob, theta) - prob.target;
  return 0.5 * r * r;
}

Vector grad_loss(const FactorisationProblem& prob, const Vector& theta) {
  return (f(prob, theta) - prob.target) * grad_f(prob, theta);
}

bool is_on_manifold(const FactorisationProblem& prob, const Vector& theta) {
  if (theta.size() != prob.depth) return false;
  if ((theta.array() <= 0.0).any()) return false;
  return std::abs(f(prob, theta) - prob.target) <= 1e-10 * prob.target;
}

void require_on_manifold(const FactorisationProblem& prob, const Vector& theta,
                         const char* who) {
  if (!is_on_manifold(prob, theta)) {
    std::ostringstream os;
    os << who << ": point is not on the solution manifold";
    throw std::domain_error(os.str());
  }
}

double sharpness(const FactorisationProblem& prob, const Vector& theta_par) {
  require_on_manifold(prob, theta_par, "sharpness");
  return grad_f(prob, theta_par).squaredNorm();
}

Vector normal(const FactorisationProblem& prob, const Vector& theta_par) {
  require_on_manifold(prob, theta_par, "normal");
  Vector g = grad_f(prob, theta_par);
  const double nrm = g.norm();
  if (nrm == 0.0) throw std::domain_error("normal: zero gradient");
  return g / nrm;
}

double dl3_n(const FactorisationProblem& prob, const Vector& theta_par) {
  require_on_manifold(prob, theta_par, "dl3_n");
  const Vector g = grad_f(prob, theta_par);
  const Vector n = g / g.norm();
  return 3.0 * d2f_contract(prob, theta_par, n, n) * g.dot(n);
}

double dl4_n(const FactorisationProblem& prob, const Vector& theta_par) {
  require_on_manifold(prob, theta_par, "dl4_n");
  const Vector g = grad_f(prob, theta_par);
  const Vector n = g / g.norm();
  const double d2 = d2f_contract(prob, theta_par, n, n);
  const double d3 = d3f_contract(prob, theta_par, n, n, n);
  return 4.0 * d3 * g.dot(n) + 3.0 * d2 * d2;
}

double c_coeff(const FactorisationProblem& prob, double eta,
               const Vector& theta_par) {
  if (!(eta > 0.0)) throw std::invalid_argument("c_coeff: eta must be positive");
  const double t3 = dl3_n(prob, theta_par);
  const double t4 = dl4_n(prob, theta_par);
  const double half = 0.5 * eta * t3;
  return half * half - eta / 6.0 * t4;
}

double c_star_closed_form(const FactorisationProblem& prob) {
  const double p = prob.depth;
  return (32.0 / (p * p * p) * binom(prob.depth, 2) * binom(prob.depth, 2) -
          8.0 / (p * p) * binom(prob.depth, 3)) *
         std::pow(prob.target, -2.0 / p);
}

}  // namespace eoslab
