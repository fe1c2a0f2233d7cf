#include "eoslab/manifold.hpp"

#include "eoslab/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace eoslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct KktBranch {
  const Vector& theta;
  double y;
  double sign;  // +1 or -1 root of the per-coordinate quadratic

  Vector coords(double alpha) const {
    Vector q(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
      double disc = theta[i] * theta[i] - 4.0 * alpha * y;
      if (disc < 0.0) disc = 0.0;
      q[i] = 0.5 * (theta[i] + sign * std::sqrt(disc));
    }
    return q;
  }

  double product(double alpha) const {
    double prod = 1.0;
    for (int i = 0; i < theta.size(); ++i) {
      double disc = theta[i] * theta[i] - 4.0 * alpha * y;
      if (disc < 0.0) disc = 0.0;
      prod *= 0.5 * (theta[i] + sign * std::sqrt(disc));
    }
    return prod;
  }
};

// Deterministic standard normals: Box-Muller over explicit 53-bit uniforms,
// so output is identical across platforms for a given seed.
class GaussianSource {
 public:
  explicit GaussianSource(unsigned long seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

ProjectionResult project_full(const FactorisationProblem& prob,
                              const Vector& theta) {
  if (theta.size() != prob.depth)
    throw std::invalid_argument("project: wrong vector length");
  if ((theta.array() <= 0.0).any())
    throw std::domain_error("project: coordinates must be positive");

  const double y = prob.target;
  const int p = prob.depth;
  double prod_theta = 1.0;
  for (int i = 0; i < p; ++i) prod_theta *= theta[i];

  const bool plus = prod_theta < y || y >= std::ldexp(prod_theta, -p);
  KktBranch branch{theta, y, plus ? 1.0 : -1.0};

  // Largest alpha keeping every discriminant nonnegative.
  const double alpha_cap = theta.array().square().minCoeff() / (4.0 * y);

  // The cap is the focal boundary where quadratic roots coalesce; an exact
  // hit there cannot be bracketed (d(product)/d(alpha) is singular).
  if (std::abs(branch.product(alpha_cap) - y) <= 4e-15 * y) {
    ProjectionResult result;
    result.point = branch.coords(alpha_cap);
    result.alpha = alpha_cap;
    result.degenerate = true;
    return result;
  }

  double lo, hi;  // bracket with the root inside
  if (plus) {
    // product decreasing in alpha
    if (prod_theta >= y) {
      lo = 0.0;
      hi = alpha_cap;
      if (branch.product(hi) > y) {
        std::ostringstream os;
        os << "project: plus-branch bracket failure (product at cap "
           << branch.product(hi) << " > target " << y << ")";
        throw NumericalError(os.str());
      }
    } else {
      hi = 0.0;
      double width = std::max(1.0, alpha_cap);
      int doublings = 0;
      while (branch.product(-width) < y) {
        width *= 2.0;
        if (++doublings > 200)
          throw NumericalError("project: bracket expansion failed");
      }
      lo = -width;
    }
  } else {
    // minus branch: product increasing in alpha from 0
    lo = 0.0;
    hi = alpha_cap;
    if (branch.product(hi) < y) {
      std::ostringstream os;
      os << "project: minus-branch bracket failure (product at cap "
         << branch.product(hi) << " < target " << y << ")";
      throw NumericalError(os.str());
    }
  }

  // product(lo) >= y >= product(hi) on the plus branch, reversed on minus.
  const double incr = plus ? -1.0 : 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (incr * (branch.product(mid) - y) <= 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * (1.0 + std::abs(lo))) break;
  }
  const double alpha = 0.5 * (lo + hi);

  ProjectionResult result;
  result.point = branch.coords(alpha);
  result.alpha = alpha;

  // Flag second-order non-uniqueness of the nearest point: the quadratic
  // roots coalesce (discriminant ~ 0) or the product is locally flat in
  // alpha.
  const double disc_min =
      (theta.array().square() - 4.0 * alpha * y).minCoeff();
  const double step = 1e-6 * (1.0 + std::abs(alpha));
  const double slope =
      (branch.product(alpha) - branch.product(alpha - step)) / step;
  result.degenerate = disc_min <= 1e-8 * theta.array().square().maxCoeff() ||
                      std::abs(slope) < 1e-8;
  return result;
}

Vector project(const FactorisationProblem& prob, const Vector& theta) {
  return project_full(prob, theta).point;
}

TubeCoords tube_coords(const FactorisationProblem& prob, const Vector& theta) {
  TubeCoords tube;
  tube.theta_par = project(prob, theta);
  tube.theta_perp = (theta - tube.theta_par).dot(normal(prob, tube.theta_par));
  return tube;
}

Vector reconstruct(const FactorisationProblem& prob, const TubeCoords& tube) {
  return tube.theta_par + tube.theta_perp * normal(prob, tube.theta_par);
}

Vector riem_grad_lambda(const FactorisationProblem& prob,
                        const Vector& theta_par) {
  require_on_manifold(prob, theta_par, "riem_grad_lambda");
  const Vector g = grad_f(prob, theta_par);
  const Vector n = g / g.norm();
  const Vector full = 2.0 * (hess_f(prob, theta_par) * g);
  return full - full.dot(n) * n;
}

Matrix riem_hess_lambda(const FactorisationProblem& prob,
                        const Vector& theta_par) {
  require_on_manifold(prob, theta_par, "riem_hess_lambda");
  const int p = prob.depth;
  const Vector g = grad_f(prob, theta_par);
  const Vector n = g / g.norm();
  const Matrix P = Matrix::Identity(p, p) - n * n.transpose();
  const Matrix H2 = hess_f(prob, theta_par);
  const Matrix T3g = d3f_apply(prob, theta_par, g);
  const Matrix core = T3g + H2 * H2 - n.dot(H2 * n) * H2;
  return 2.0 * P * core * P;
}

Matrix riem_hess_lambda_closed(const FactorisationProblem& prob,
                               const Vector& theta_par) {
  require_on_manifold(prob, theta_par, "riem_hess_lambda_closed");
  const int p = prob.depth;
  const double y = prob.target;
  const Vector v = theta_par.cwiseInverse();
  const Vector v2 = v.array().square().matrix();
  const Vector v4 = v2.array().square().matrix();
  const double s1 = v2.sum();
  const double s2 = v4.sum();
  const Vector n = normal(prob, theta_par);
  const Matrix P = Matrix::Identity(p, p) - n * n.transpose();
  Vector diag;
  if (p > 2)
    diag = 3.0 * v4 - (s2 / s1) * v2;
  else
    diag = v4 + (s1 - s2 / s1) * v2;
  return 2.0 * y * y * P * diag.asDiagonal() * P;
}

Matrix tangent_basis(const FactorisationProblem& prob,
                     const Vector& theta_par) {
  const int p = prob.depth;
  const Vector n = normal(prob, theta_par);
  // Householder complement of n: columns 2..p of the reflector mapping e1 to n.
  Eigen::HouseholderQR<Matrix> qr(n);
  Matrix Q = qr.householderQ();
  Matrix basis = Q.rightCols(p - 1);
  return basis;
}

std::vector<double> tangent_eigenvalues(const FactorisationProblem& prob,
                                        const Vector& theta_par,
                                        const Matrix& H) {
  const Matrix B = tangent_basis(prob, theta_par);
  const Matrix Ht = B.transpose() * H * B;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (Ht + Ht.transpose()));
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

std::vector<Vector> sample_near(const FactorisationProblem& prob,
                                double radius, int count, unsigned long seed) {
  if (radius < 0.0) throw std::invalid_argument("sample_near: radius < 0");
  if (radius >= std::pow(prob.target, 1.0 / prob.depth))
    throw std::invalid_argument(
        "sample_near: radius must stay below y^(1/p) to remain in the "
        "positive orthant");
  if (count < 0) throw std::invalid_argument("sample_near: count < 0");
  const Vector star = prob.balanced_point();
  const Vector n_star = Vector::Constant(prob.depth, 1.0 / std::sqrt(prob.depth));
  GaussianSource gauss(seed);

  std::vector<Vector> points;
  points.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vector v(prob.depth);
    for (int i = 0; i < prob.depth; ++i) v[i] = gauss();
    v -= v.dot(n_star) * n_star;
    const double nrm = v.norm();
    if (radius == 0.0 || nrm == 0.0) {
      points.push_back(star);
      continue;
    }
    v *= radius / nrm;
    Vector pt = project(prob, star + v);
    // The projection can overshoot the radius slightly; shrink until inside.
    for (int iter = 0; iter < 60; ++iter) {
      const double dist = (pt - star).norm();
      if (dist <= radius) break;
      v *= radius / dist;
      pt = project(prob, star + v);
    }
    if ((pt - star).norm() > radius)
      throw NumericalError("sample_near: could not shrink inside radius");
    points.push_back(std::move(pt));
  }
  return points;
}

GeometryConstants geometry_constants(const FactorisationProblem& prob,
                                     int lipschitz_samples,
                                     unsigned long seed) {
  GeometryConstants gc;
  const double y = prob.target;
  const int p = prob.depth;
  gc.lambda_star = prob.lambda_star();
  gc.nu = 4.0 * std::pow(y, 2.0 - 4.0 / p);
  if (p == 2) {
    gc.mu = 2.0;
    gc.ball_radius = std::numeric_limits<double>::infinity();
    gc.exact_radius = std::numeric_limits<double>::infinity();
  } else {
    gc.mu = 1.33 * std::pow(y, 2.0 - 4.0 / p);
    gc.ball_radius = 0.15 * std::pow(y, 1.0 / p);
    gc.exact_radius = std::pow(y, 1.0 / p) *
                      (4.0 * kPi + 1.0 - std::sqrt(16.0 * kPi + 1.0)) /
                      (16.0 * kPi - 8.0);
  }
  gc.c_star = c_coeff(prob, 2.0 / gc.lambda_star, prob.balanced_point());

  const double sample_radius = 0.15 * std::pow(y, 1.0 / p);
  double lip = 0.0;
  for (const Vector& pt :
       sample_near(prob, sample_radius, lipschitz_samples, seed)) {
    const auto eigs = tangent_eigenvalues(prob, pt, riem_hess_lambda(prob, pt));
    lip = std::max(lip, eigs.back());
  }
  gc.lipschitz = lip;
  return gc;
}

}  // namespace eoslab
