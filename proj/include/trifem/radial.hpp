#pragma once

#include <limits>
#include <vector>

#include "trifem/geometry.hpp"
#include "trifem/mesh.hpp"

namespace trifem {

enum class CutoffKind {
  quintic_c2,   // 1/2 - 15/16 t + 5/8 t^3 - 3/16 t^5
  degree13_c6,  // 1/2 + sum_{i<7} C_i t^(2i+1), six vanishing derivatives at r = R
};

inline constexpr double kDefaultCutoffRadius = 32.0 / 5.0;
inline constexpr double kDefaultCutoffTau = 1.0 / 8.0;

/// Radial blend equal to 1 on [0, tau R] and 0 on [R, inf). In between it is
/// an odd polynomial in the shifted variable
///   t = 2r / (R (1 - tau)) - (1 + tau) / (1 - tau),
/// offset by 1/2, so t = -1 at r = tau R and t = 1 at r = R.
struct CutoffSpec {
  double R = kDefaultCutoffRadius;
  double tau = kDefaultCutoffTau;
  CutoffKind kind = CutoffKind::quintic_c2;
  /// odd_coefficients[i] multiplies t^(2i+1).
  std::vector<double> odd_coefficients;

  double shifted(double r) const { return 2.0 * r / (R * (1.0 - tau)) - (1.0 + tau) / (1.0 - tau); }
  /// d^order/dt^order of the blend polynomial (no plateau clamping).
  double polynomial_derivative(double t, int order) const;
  /// d^order/dr^order of the cut-off, piecewise.
  double derivative(double r, int order) const;
};

CutoffSpec quintic_cutoff(double R = kDefaultCutoffRadius, double tau = kDefaultCutoffTau);

/// Degree-13 cut-off: solves the 7x7 system for C_0..C_6 so that the blend and
/// its first six derivatives vanish at r = R.
CutoffSpec eta_tilde_coeffs(double R = kDefaultCutoffRadius, double tau = kDefaultCutoffTau);

double eta_eval(const CutoffSpec& spec, double r);

/// One radial interval [r_begin, r_end) carrying sum_j coeffs[j] r^(k_min + j).
struct RadialPiece {
  double r_begin = 0.0;
  double r_end = std::numeric_limits<double>::infinity();
  int k_min = 0;
  std::vector<double> coeffs;
};

/// Field g(r) sin(s theta) in a corner frame with
///   g(r) = r^p * sum_k a_k r^k   (piecewise in r),
/// where s is the angular frequency and p the radial offset (+s for primal
/// fields, -s for the singular chi_i). Closed under the Laplacian:
///   Delta[r^(k+p) sin(s theta)] = ((k+p)^2 - s^2) r^(k+p-2) sin(s theta).
class RadialField {
 public:
  RadialField(CornerFrame frame, double angular_frequency, double radial_offset, std::vector<RadialPiece> pieces);

  const CornerFrame& frame() const { return frame_; }
  double angular_frequency() const { return s_; }
  double radial_offset() const { return p_; }
  const std::vector<RadialPiece>& pieces() const { return pieces_; }

  /// True when the piece at the origin has a nonzero negative-power term.
  bool distributional() const;
  /// The field vanishes for r >= outer_support() and for r < inner_zero_radius().
  double outer_support() const;
  double inner_zero_radius() const;

  double radial(double r) const;
  double radial_derivative(double r) const;

  double eval_polar(double r, double theta) const;
  double eval(Point2 p) const;
  Point2 gradient(Point2 p) const;
  double operator()(Point2 p) const { return eval(p); }

  RadialField scaled(double factor) const;

 private:
  const RadialPiece& piece_at(double r) const;

  CornerFrame frame_;
  double s_;
  double p_;
  std::vector<RadialPiece> pieces_;
};

RadialField laplacian(const RadialField& field);

/// cutoff(r) * r^radial_offset * sin(s theta) as an exact piecewise field.
RadialField cutoff_power_field(const CornerFrame& frame, const CutoffSpec& spec, double s, double radial_offset);

/// chi_i = eta(r) r^(-s) sin(s theta), with s = i pi / omega.
RadialField singular_chi(const CornerFrame& frame, const CutoffSpec& spec, double s);

/// f = -Delta^3 (eta~(r) r^s sin(s theta)); requires the degree-13 cut-off
/// so that f stays square integrable.
RadialField triharmonic_source(const CornerFrame& frame, double s, const CutoffSpec& spec);

}  // namespace trifem
