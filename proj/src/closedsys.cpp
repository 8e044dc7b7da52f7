#include "dicke/closedsys.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dicke::closedsys {

namespace {

// Normal-mode form: with quadratures q = (a+a')/sqrt(2) etc. the Hamiltonian
// is 1/2 q^T A q + 1/2 p^T B p, A = [[w, 2l], [2l, w0]], B = diag(w, w0).
// Ground-state covariances follow from K = B^1/2 A B^1/2 = O W^2 O^T:
//   <qq^T> = 1/2 B^1/2 K^-1/2 B^1/2,   <pp^T> = 1/2 B^-1/2 K^1/2 B^-1/2.
GroundStateFluctuations symplectic_moments(double omega, double omega0,
                                           double lambda, double x) {
  Eigen::Matrix2d k;
  const double c = 2.0 * lambda * std::sqrt(omega * omega0);
  k << omega * omega, c, c, omega0 * omega0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(k);
  const Eigen::Vector2d w2 = es.eigenvalues();
  if (!(w2(0) > 0.0))
    throw std::domain_error("ground_state_fluctuations: not in normal phase");
  const Eigen::Matrix2d o = es.eigenvectors();
  const Eigen::Vector2d winv = w2.cwiseSqrt().cwiseInverse();
  const Eigen::Matrix2d k_isqrt = o * winv.asDiagonal() * o.transpose();
  const Eigen::Matrix2d k_sqrt = o * w2.cwiseSqrt().asDiagonal() * o.transpose();

  const Eigen::Vector2d b_sqrt(std::sqrt(omega), std::sqrt(omega0));
  const Eigen::Matrix2d covq = 0.5 * b_sqrt.asDiagonal() * k_isqrt *
                               b_sqrt.asDiagonal().toDenseMatrix();
  const Eigen::Vector2d b_isqrt = b_sqrt.cwiseInverse();
  const Eigen::Matrix2d covp = 0.5 * b_isqrt.asDiagonal() * k_sqrt *
                               b_isqrt.asDiagonal().toDenseMatrix();

  GroundStateFluctuations g;
  g.x = x;
  g.photon_variance = 0.5 * (covq(0, 0) + covp(0, 0)) - 0.5;
  g.quadrature_variance = 2.0 * covq(1, 1);
  return g;
}

struct FockMoments {
  double photon = 0.0;
  double quad = 1.0;
  double odd_weight = 0.0;
};

// Ground state of the truncated Fock Hamiltonian by shifted inverse
// iteration.  The shift sits 0.05*omega0 below the Rayleigh quotient, hence
// always below the target eigenvalue, so H - sigma stays positive definite.
FockMoments fock_ground_state(double omega, double omega0, double lambda,
                              int n_a_max, int n_b_max) {
  const int na = n_a_max + 1, nb = n_b_max + 1;
  const int dim = na * nb;
  auto idx = [nb](int ia, int ib) { return ia * nb + ib; };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(dim) * 5);
  for (int ia = 0; ia < na; ++ia)
    for (int ib = 0; ib < nb; ++ib) {
      trip.emplace_back(idx(ia, ib), idx(ia, ib), omega * ia + omega0 * ib);
      if (ia + 1 < na && ib + 1 < nb)
        trip.emplace_back(idx(ia, ib), idx(ia + 1, ib + 1),
                          lambda * std::sqrt((ia + 1.0) * (ib + 1.0)));
      if (ia + 1 < na && ib - 1 >= 0)
        trip.emplace_back(idx(ia, ib), idx(ia + 1, ib - 1),
                          lambda * std::sqrt((ia + 1.0) * ib));
      if (ia - 1 >= 0 && ib + 1 < nb)
        trip.emplace_back(idx(ia, ib), idx(ia - 1, ib + 1),
                          lambda * std::sqrt(ia * (ib + 1.0)));
      if (ia - 1 >= 0 && ib - 1 >= 0)
        trip.emplace_back(idx(ia, ib), idx(ia - 1, ib - 1),
                          lambda * std::sqrt(static_cast<double>(ia) * ib));
    }
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v(0) = 1.0;  // vacuum has dominant overlap with the ground state
  double theta = 0.0;
  Eigen::SparseMatrix<double> id(dim, dim);
  id.setIdentity();
  bool converged = false;
  for (int it = 0; it < 60; ++it) {
    theta = v.dot(h * v);
    const Eigen::VectorXd resid = h * v - theta * v;
    if (resid.norm() <= 1e-12 * omega) {
      converged = true;
      break;
    }
    const double sigma = theta - 0.05 * omega0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(h - sigma * id);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("fock_oracle: factorization failed");
    v = solver.solve(v);
    v.normalize();
  }
  if (!converged)
    throw std::runtime_error("fock_oracle: inverse iteration did not converge");

  FockMoments m;
  m.photon = 0.0;
  double nb_mean = 0.0, b2 = 0.0, odd = 0.0;
  for (int ia = 0; ia < na; ++ia)
    for (int ib = 0; ib < nb; ++ib) {
      const double c = v(idx(ia, ib));
      m.photon += ia * c * c;
      nb_mean += ib * c * c;
      if ((ia + ib) % 2 == 1) odd += c * c;
      if (ib + 2 < nb)
        b2 += c * v(idx(ia, ib + 2)) * std::sqrt((ib + 1.0) * (ib + 2.0));
    }
  // <(b+b')^2> = 1 + 2<b'b> + <b^2> + <b'^2>, and <b^2> = <b'^2> (real state)
  m.quad = 1.0 + 2.0 * nb_mean + 2.0 * b2;
  m.odd_weight = odd;
  return m;
}

double coupling_for(const PhysicalParams& p, double x) {
  if (!(x >= 0.0 && x < 1.0))
    throw std::domain_error("closed system: x must be in [0, 1)");
  return lambda_cr_closed(p) * std::sqrt(x);
}

}  // namespace

GroundStateFluctuations ground_state_fluctuations(const PhysicalParams& p,
                                                  double x) {
  return symplectic_moments(p.omega, p.omega0, coupling_for(p, x), x);
}

GroundStateFluctuations fock_oracle(const PhysicalParams& p, double x,
                                    int n_a_max, int n_b_max) {
  if (n_a_max < 2 || n_b_max < 2)
    throw std::invalid_argument("fock_oracle: truncation sizes must be >= 2");
  const double lambda = coupling_for(p, x);
  const FockMoments base =
      fock_ground_state(p.omega, p.omega0, lambda, n_a_max, n_b_max);
  const FockMoments fine =
      fock_ground_state(p.omega, p.omega0, lambda, 2 * n_a_max, 2 * n_b_max);
  const double dq = std::abs(fine.quad - base.quad) / std::abs(fine.quad);
  const double dp = std::abs(fine.photon - base.photon) /
                    std::max(std::abs(fine.photon), 1e-12);
  if (dq > 1e-3 || dp > 1e-3)
    throw std::runtime_error("fock_oracle: moments not converged in truncation");
  GroundStateFluctuations g;
  g.x = x;
  g.photon_variance = fine.photon;
  g.quadrature_variance = fine.quad;
  return g;
}

double fock_odd_parity_weight(const PhysicalParams& p, double x, int n_a_max,
                              int n_b_max) {
  const double lambda = coupling_for(p, x);
  return fock_ground_state(p.omega, p.omega0, lambda, n_a_max, n_b_max)
      .odd_weight;
}

}  // namespace dicke::closedsys
