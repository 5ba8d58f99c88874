#include "a3dmm/spectra.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "a3dmm/error.hpp"
#include "a3dmm/trace.hpp"

namespace a3dmm {

std::optional<double> trajectory_angle(const VectorXd& v_k,
                                       const VectorXd& v_km1) {
  if (v_k.size() != v_km1.size()) {
    throw Error(Errc::DimensionMismatch, "angle between differences");
  }
  const double a = v_k.norm();
  const double b = v_km1.norm();
  if (a < 1e-300 || b < 1e-300) return std::nullopt;
  return std::clamp(v_k.dot(v_km1) / (a * b), -1.0, 1.0);
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::StraightLine: return "straight-line";
    case TrajectoryKind::Spiral: return "spiral";
    case TrajectoryKind::Undetermined: return "undetermined";
  }
  return "undetermined";
}

AngleSeries AngleSeries::from_differences(const std::vector<VectorXd>& v) {
  AngleSeries s;
  s.cos_theta.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    s.cos_theta.push_back(i == 0 ? std::nullopt
                                 : trajectory_angle(v[i], v[i - 1]));
  }
  return s;
}

void AngleSeries::truncate_at_noise(const std::vector<double>& norm_v,
                                    double floor) {
  for (std::size_t i = 0; i < norm_v.size() && i < cos_theta.size(); ++i) {
    if (norm_v[i] < floor) {
      cos_theta.resize(i);
      return;
    }
  }
}

TrajectoryKind classify_trajectory(AngleSeries& series,
                                   const ClassifyOptions& options) {
  std::vector<double> tail;
  for (auto it = series.cos_theta.rbegin();
       it != series.cos_theta.rend() &&
       static_cast<int>(tail.size()) < options.window;
       ++it) {
    if (*it) tail.push_back(**it);
  }
  const bool stagnated =
      tail.empty() &&
      static_cast<int>(series.cos_theta.size()) >= options.window;
  if (stagnated) {
    series.kind = TrajectoryKind::Undetermined;
    series.limit = 0.0;
    series.spread = 0.0;
    return series.kind;
  }
  if (static_cast<int>(tail.size()) < options.window) {
    throw Error(Errc::InsufficientData,
                std::to_string(tail.size()) + " valid angles, window is " +
                    std::to_string(options.window));
  }
  double mean = 0.0;
  for (double c : tail) mean += c;
  mean /= static_cast<double>(tail.size());
  double var = 0.0;
  double lo = tail.front();
  double hi = tail.front();
  for (double c : tail) {
    var += (c - mean) * (c - mean);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  var /= static_cast<double>(tail.size());
  series.limit = mean;
  series.spread = std::max(hi - mean, mean - lo);

  TrajectoryKind kind = TrajectoryKind::Undetermined;
  if (mean >= 1.0 - options.straight_tol) {
    kind = TrajectoryKind::StraightLine;
  } else if (mean <= 1.0 - options.spiral_gap &&
             std::sqrt(var) <= options.settled_std) {
    kind = TrajectoryKind::Spiral;
  } else {
    // Bounded oscillation: at least one full period around the mean with an
    // amplitude well above rounding, never touching 1.
    int crossings = 0;
    for (std::size_t i = 1; i < tail.size(); ++i) {
      if ((tail[i] - mean) * (tail[i - 1] - mean) < 0.0) ++crossings;
    }
    if (crossings >= 2 && hi - lo >= options.min_amplitude && hi < 1.0) {
      kind = TrajectoryKind::Spiral;
    }
  }
  series.kind = kind;
  return kind;
}

namespace {

void check_orthonormal(const MatrixXd& u, const char* which) {
  const MatrixXd gram = u.transpose() * u;
  const double err =
      (gram - MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
  if (u.cols() > 0 && !(err <= 1e-10)) {
    throw Error(Errc::NotOrthonormal, std::string(which) +
                                          " columns deviate from orthonormal "
                                          "by " +
                                          std::to_string(err));
  }
}

}  // namespace

std::vector<double> principal_angles(const MatrixXd& u1, const MatrixXd& u2) {
  if (u1.rows() != u2.rows()) {
    throw Error(Errc::DimensionMismatch, "bases live in different spaces");
  }
  check_orthonormal(u1, "U1");
  check_orthonormal(u2, "U2");
  // Let U1 be the smaller basis so that the count is min(dim).
  const MatrixXd& a = u1.cols() <= u2.cols() ? u1 : u2;
  const MatrixXd& b = u1.cols() <= u2.cols() ? u2 : u1;
  const Index r = a.cols();
  if (r == 0) return {};

  Eigen::JacobiSVD<MatrixXd> cos_svd(b.transpose() * a);
  VectorXd cosines = cos_svd.singularValues();  // descending
  // Sines: singular values of (I - P_b) a, ascending after reversal.
  const MatrixXd residual = a - b * (b.transpose() * a);
  Eigen::JacobiSVD<MatrixXd> sin_svd(residual);
  VectorXd sines = sin_svd.singularValues();  // descending, length r

  std::vector<double> angles(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(r - 1 - i), 0.0, 1.0);
    // Cosines are accurate for large angles, sines for small ones.
    angles[static_cast<std::size_t>(i)] =
        c * c < 0.5 ? std::acos(c) : std::asin(s);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double friedrichs_angle(const MatrixXd& u1, const MatrixXd& u2) {
  const auto angles = principal_angles(u1, u2);
  for (double t : angles) {
    if (t >= kIntersectionTol) return t;
  }
  if (u1.cols() == u2.cols()) {
    throw Error(Errc::DegenerateIntersection, "subspaces coincide");
  }
  return std::numbers::pi / 2.0;
}

MatrixXd polyhedral_admm_matrix(const MatrixXd& t_ar, const MatrixXd& t_bj) {
  if (t_ar.rows() != t_bj.rows()) {
    throw Error(Errc::DimensionMismatch, "bases live in different spaces");
  }
  check_orthonormal(t_ar, "T_AR");
  check_orthonormal(t_bj, "T_BJ");
  const Index n = t_ar.rows();
  const MatrixXd p1 = t_ar * t_ar.transpose();
  const MatrixXd p2 = t_bj * t_bj.transpose();
  const MatrixXd id = MatrixXd::Identity(n, n);
  return p1 * p2 + (id - p1) * (id - p2);
}

MatrixXd orthonormal_basis(const MatrixXd& m, double tol) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
  qr.setThreshold(tol);
  const Index r = qr.rank();
  return MatrixXd(qr.householderQ()).leftCols(r);
}

std::array<std::complex<double>, 2> inertial_roots(std::complex<double> eta,
                                                   double a) {
  using C = std::complex<double>;
  const C b = (1.0 + a) * eta;
  const C disc = std::sqrt(b * b - 4.0 * a * eta);
  // Pick the numerically stable pair: the root with |b + sign disc| largest.
  const C big = std::abs(b + disc) >= std::abs(b - disc) ? (b + disc) / 2.0
                                                         : (b - disc) / 2.0;
  C other;
  if (std::abs(big) > 0.0) {
    other = a * eta / big;
  } else {
    other = C(0.0, 0.0);
  }
  if (std::abs(other) > std::abs(big)) return {other, big};
  return {big, other};
}

double inertial_spectral_radius(std::complex<double> eta, double a) {
  return std::abs(inertial_roots(eta, a)[0]);
}

std::vector<RegimeRow> inertial_regime_map(
    const std::vector<std::complex<double>>& etas,
    const std::vector<double>& as) {
  std::vector<RegimeRow> rows;
  rows.reserve(etas.size() * as.size());
  for (const auto& eta : etas) {
    for (double a : as) {
      RegimeRow r;
      r.re_eta = eta.real();
      r.im_eta = eta.imag();
      r.a = a;
      r.rho = inertial_spectral_radius(eta, a);
      r.accelerates = r.rho < std::abs(eta);
      r.converges = r.rho < 1.0;
      rows.push_back(r);
    }
  }
  return rows;
}

void write_regime_csv(const std::vector<RegimeRow>& rows, std::ostream& out) {
  out << "re_eta,im_eta,a,rho,accelerates,converges\n";
  for (const auto& r : rows) {
    out << format_double(r.re_eta) << ',' << format_double(r.im_eta) << ','
        << format_double(r.a) << ',' << format_double(r.rho) << ','
        << (r.accelerates ? 1 : 0) << ',' << (r.converges ? 1 : 0) << '\n';
  }
}

}  // namespace a3dmm
