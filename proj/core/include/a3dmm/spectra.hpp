#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "a3dmm/linear_map.hpp"

namespace a3dmm {

/// cos of the angle between consecutive differences, clamped to [-1, 1];
/// absent when either norm is below 1e-300.
std::optional<double> trajectory_angle(const VectorXd& v_k,
                                       const VectorXd& v_km1);

enum class TrajectoryKind { StraightLine, Spiral, Undetermined };

std::string to_string(TrajectoryKind kind);

struct ClassifyOptions {
  int window = 50;
  double straight_tol = 1e-3;
  double spiral_gap = 1e-2;
  /// Trailing standard deviation below which cos(theta) counts as settled.
  double settled_std = 1e-3;
  /// Peak-to-peak swing that counts as an oscillation.
  double min_amplitude = 1e-4;
};

struct AngleSeries {
  std::vector<std::optional<double>> cos_theta;
  TrajectoryKind kind = TrajectoryKind::Undetermined;
  /// Mean of the trailing window and its half-width (max deviation).
  double limit = 0.0;
  double spread = 0.0;

  /// Angles from a sequence of differences.
  static AngleSeries from_differences(const std::vector<VectorXd>& v);
  /// Drops entries after the first k whose |v_k| falls below `floor`, where
  /// rounding starts to dominate the angle.
  void truncate_at_noise(const std::vector<double>& norm_v, double floor);
};

/// Classifies the trailing `options.window` valid entries. Throws
/// InsufficientData if there are fewer, except that a series of at least
/// `window` entries with no valid angle at all (the differences vanished)
/// is Undetermined.
TrajectoryKind classify_trajectory(AngleSeries& series,
                                   const ClassifyOptions& options = {});

/// Principal angles in ascending order; inputs must have orthonormal
/// columns (1e-10). Small angles are resolved through sines.
std::vector<double> principal_angles(const MatrixXd& u1, const MatrixXd& u2);

inline constexpr double kIntersectionTol = 1e-8;

/// Smallest principal angle above kIntersectionTol. When one subspace
/// strictly contains the other the result is pi/2; equal subspaces throw
/// DegenerateIntersection.
double friedrichs_angle(const MatrixXd& u1, const MatrixXd& u2);

/// P1 P2 + (I - P1)(I - P2) for projectors onto span(t_ar), span(t_bj).
MatrixXd polyhedral_admm_matrix(const MatrixXd& t_ar, const MatrixXd& t_bj);

/// Orthonormal basis of the column span.
MatrixXd orthonormal_basis(const MatrixXd& m, double tol = 1e-12);

/// Roots of r^2 - (1 + a) eta r + a eta = 0, larger modulus first.
std::array<std::complex<double>, 2> inertial_roots(std::complex<double> eta,
                                                   double a);
double inertial_spectral_radius(std::complex<double> eta, double a);

struct RegimeRow {
  double re_eta = 0.0;
  double im_eta = 0.0;
  double a = 0.0;
  double rho = 0.0;
  bool accelerates = false;
  bool converges = false;
};

std::vector<RegimeRow> inertial_regime_map(
    const std::vector<std::complex<double>>& etas,
    const std::vector<double>& as);

void write_regime_csv(const std::vector<RegimeRow>& rows, std::ostream& out);

}  // namespace a3dmm
