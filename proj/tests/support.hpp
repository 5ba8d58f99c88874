#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

namespace a3dmm::testing {

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n,
                                     double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r,
                                     Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

/// Random orthonormal n x k basis.
inline Eigen::MatrixXd random_basis(std::mt19937_64& rng, Eigen::Index n,
                                    Eigen::Index k) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, k));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

/// z_{k+1} - z* = M (z_k - z*) with M = S D S^{-1} diagonalizable. D holds
/// `distinct` eigenvalues (real ones and conjugate pairs as rotation blocks)
/// repeated to fill dimension p, so the minimal polynomial has degree
/// `distinct`. S is a product of two orthogonal factors and a diagonal in
/// [0.5, 2].
struct LinearSequence {
  Eigen::MatrixXd m;
  Eigen::VectorXd z_star;
  Eigen::VectorXd z0;
  int degree = 0;

  Eigen::VectorXd iterate(int k) const {
    Eigen::VectorXd e = z0 - z_star;
    for (int i = 0; i < k; ++i) e = m * e;
    return z_star + e;
  }
};

inline LinearSequence make_linear_sequence(std::mt19937_64& rng, int p,
                                           int distinct, double rho_max) {
  std::uniform_real_distribution<double> mod(0.3, rho_max);
  std::uniform_real_distribution<double> ang(0.2, 2.9);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::bernoulli_distribution coin(0.5);

  // Blocks: 1x1 real eigenvalue or 2x2 rotation r R(t) (two eigenvalues).
  struct Block {
    Eigen::MatrixXd b;
  };
  std::vector<Block> blocks;
  int roots = 0;
  while (roots < distinct) {
    const bool pair = distinct - roots >= 2 && p >= 2 && coin(rng);
    if (pair) {
      const double r = mod(rng), t = ang(rng);
      Eigen::MatrixXd b(2, 2);
      b << r * std::cos(t), -r * std::sin(t), r * std::sin(t), r * std::cos(t);
      blocks.push_back({b});
      roots += 2;
    } else {
      Eigen::MatrixXd b(1, 1);
      b(0, 0) = coin(rng) ? mod(rng) : -mod(rng);
      blocks.push_back({b});
      roots += 1;
    }
  }
  int used = 0;
  for (const auto& b : blocks) used += static_cast<int>(b.b.rows());
  // Repeat blocks until the dimension is filled; keep real blocks for
  // odd leftovers.
  std::vector<Block> all = blocks;
  std::size_t next = 0;
  while (used < p) {
    const Block& b = blocks[next % blocks.size()];
    ++next;
    if (used + b.b.rows() > p) {
      bool found = false;
      for (const auto& c : blocks)
        if (c.b.rows() == 1) {
          all.push_back(c);
          used += 1;
          found = true;
          break;
        }
      if (!found) break;
      continue;
    }
    all.push_back(b);
    used += static_cast<int>(b.b.rows());
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(used, used);
  int at = 0;
  for (const auto& b : all) {
    const auto n = b.b.rows();
    d.block(at, at, n, n) = b.b;
    at += static_cast<int>(n);
  }
  const int dim = used;
  Eigen::MatrixXd s = random_basis(rng, dim, dim);
  Eigen::VectorXd sc(dim);
  for (int i = 0; i < dim; ++i) sc(i) = scale(rng);
  s = s * sc.asDiagonal() * random_basis(rng, dim, dim);

  LinearSequence seq;
  seq.m = s * d * s.inverse();
  seq.z_star = random_vector(rng, dim);
  seq.z0 = seq.z_star + random_vector(rng, dim);
  seq.degree = roots;
  return seq;
}

}  // namespace a3dmm::testing

#define EXPECT_ERRC(stmt, errc)                              \
  do {                                                       \
    try {                                                    \
      stmt;                                                  \
      ADD_FAILURE() << "expected " << ::a3dmm::to_string(errc); \
    } catch (const ::a3dmm::Error& e) {                      \
      EXPECT_EQ(e.code(), errc) << e.what();                 \
    }                                                        \
  } while (0)
