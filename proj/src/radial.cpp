#include "trifem/radial.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace trifem {

namespace {

// n (n-1) ... (n-k+1)
double falling_factorial(int n, int k) {
  if (k > n) return 0.0;
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= static_cast<double>(n - i);
  return f;
}

void check_cutoff_parameters(double R, double tau) {
  if (!(R > 0.0)) throw std::invalid_argument("cut-off radius R must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("cut-off fraction tau must lie in (0, 1)");
}

}  // namespace

double CutoffSpec::polynomial_derivative(double t, int order) const {
  double value = order == 0 ? 0.5 : 0.0;
  for (std::size_t i = 0; i < odd_coefficients.size(); ++i) {
    const int power = 2 * static_cast<int>(i) + 1;
    if (order > power) continue;
    value += odd_coefficients[i] * falling_factorial(power, order) * std::pow(t, power - order);
  }
  return value;
}

double CutoffSpec::derivative(double r, int order) const {
  if (r <= tau * R) return order == 0 ? 1.0 : 0.0;
  if (r >= R) return 0.0;
  const double dt_dr = 2.0 / (R * (1.0 - tau));
  return polynomial_derivative(shifted(r), order) * std::pow(dt_dr, order);
}

CutoffSpec quintic_cutoff(double R, double tau) {
  check_cutoff_parameters(R, tau);
  return {R, tau, CutoffKind::quintic_c2, {-15.0 / 16.0, 5.0 / 8.0, -3.0 / 16.0}};
}

CutoffSpec eta_tilde_coeffs(double R, double tau) {
  check_cutoff_parameters(R, tau);
  // Row i: i-th t-derivative at t = 1 of 1/2 + sum_k C_k t^(2k+1) vanishes.
  Eigen::Matrix<double, 7, 7> a;
  Eigen::Matrix<double, 7, 1> b = Eigen::Matrix<double, 7, 1>::Zero();
  for (int i = 0; i < 7; ++i) {
    for (int k = 0; k < 7; ++k) a(i, k) = falling_factorial(2 * k + 1, i);
  }
  b(0) = -0.5;
  const Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(a);
  if (!lu.isInvertible()) throw std::runtime_error("cut-off coefficient system is singular");
  const Eigen::Matrix<double, 7, 1> c = lu.solve(b);
  CutoffSpec spec{R, tau, CutoffKind::degree13_c6, {}};
  spec.odd_coefficients.assign(c.data(), c.data() + 7);
  return spec;
}

double eta_eval(const CutoffSpec& spec, double r) { return spec.derivative(r, 0); }

// ---------------------------------------------------------------------------

RadialField::RadialField(CornerFrame frame, double angular_frequency, double radial_offset,
                         std::vector<RadialPiece> pieces)
    : frame_(frame), s_(angular_frequency), p_(radial_offset), pieces_(std::move(pieces)) {
  if (pieces_.empty() || pieces_.front().r_begin != 0.0) {
    throw std::invalid_argument("radial pieces must start at r = 0");
  }
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    if (pieces_[i].r_begin != pieces_[i - 1].r_end || !(pieces_[i].r_begin > pieces_[i - 1].r_begin)) {
      throw std::invalid_argument("radial pieces must partition [0, inf) in order");
    }
  }
  if (!std::isinf(pieces_.back().r_end)) throw std::invalid_argument("last radial piece must extend to infinity");
}

bool RadialField::distributional() const {
  const RadialPiece& first = pieces_.front();
  for (std::size_t j = 0; j < first.coeffs.size(); ++j) {
    if (first.coeffs[j] != 0.0 && first.k_min + static_cast<double>(j) + p_ < 0.0) return true;
  }
  return false;
}

namespace {
bool piece_is_zero(const RadialPiece& piece) {
  for (double a : piece.coeffs) {
    if (a != 0.0) return false;
  }
  return true;
}
}  // namespace

double RadialField::outer_support() const {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = pieces_.size(); i-- > 0 && piece_is_zero(pieces_[i]);) r = pieces_[i].r_begin;
  return r;
}

double RadialField::inner_zero_radius() const {
  double r = 0.0;
  for (std::size_t i = 0; i < pieces_.size() && piece_is_zero(pieces_[i]); ++i) r = pieces_[i].r_end;
  return r;
}

const RadialPiece& RadialField::piece_at(double r) const {
  for (const auto& piece : pieces_) {
    if (r < piece.r_end) return piece;
  }
  return pieces_.back();
}

double RadialField::radial(double r) const {
  const RadialPiece& piece = piece_at(r);
  if (piece.coeffs.empty()) return 0.0;
  double poly = 0.0;
  for (std::size_t j = piece.coeffs.size(); j-- > 0;) poly = poly * r + piece.coeffs[j];
  return std::pow(r, piece.k_min + p_) * poly;
}

double RadialField::radial_derivative(double r) const {
  const RadialPiece& piece = piece_at(r);
  if (piece.coeffs.empty()) return 0.0;
  double poly = 0.0;
  for (std::size_t j = piece.coeffs.size(); j-- > 0;) {
    poly = poly * r + piece.coeffs[j] * (piece.k_min + static_cast<double>(j) + p_);
  }
  return std::pow(r, piece.k_min + p_ - 1.0) * poly;
}

double RadialField::eval_polar(double r, double theta) const {
  if (r == 0.0 && distributional()) throw GeometryError("distributional field evaluated at the corner");
  return radial(r) * std::sin(s_ * theta);
}

double RadialField::eval(Point2 p) const {
  const PolarPoint pp = corner_polar(frame_, p);
  return eval_polar(pp.r, pp.theta);
}

Point2 RadialField::gradient(Point2 p) const {
  const PolarPoint pp = corner_polar(frame_, p);
  if (pp.r == 0.0) throw GeometryError("gradient of a corner field requested at the corner");
  const double st = std::sin(s_ * pp.theta);
  const double ct = std::cos(s_ * pp.theta);
  const double d_r = radial_derivative(pp.r) * st;
  const double d_theta = radial(pp.r) * s_ * ct / pp.r;
  const Point2 e0 = frame_.theta0_direction;
  const Point2 e90 = frame_.theta90_direction();
  const double c = std::cos(pp.theta);
  const double s = std::sin(pp.theta);
  const Point2 r_hat = c * e0 + s * e90;
  const Point2 theta_hat = (-s) * e0 + c * e90;
  return d_r * r_hat + d_theta * theta_hat;
}

RadialField RadialField::scaled(double factor) const {
  std::vector<RadialPiece> pieces = pieces_;
  for (auto& piece : pieces) {
    for (double& a : piece.coeffs) a *= factor;
  }
  return RadialField(frame_, s_, p_, std::move(pieces));
}

RadialField laplacian(const RadialField& field) {
  const double s = field.angular_frequency();
  const double p = field.radial_offset();
  std::vector<RadialPiece> pieces = field.pieces();
  for (auto& piece : pieces) {
    for (std::size_t j = 0; j < piece.coeffs.size(); ++j) {
      const double e = piece.k_min + static_cast<double>(j) + p;
      piece.coeffs[j] *= e * e - s * s;
    }
    piece.k_min -= 2;
  }
  return RadialField(field.frame(), s, p, std::move(pieces));
}

RadialField cutoff_power_field(const CornerFrame& frame, const CutoffSpec& spec, double s, double radial_offset) {
  const double r_inner = spec.tau * spec.R;
  // Expand 1/2 + sum_i c_i (alpha r - beta)^(2i+1) in powers of r.
  const long double alpha = 2.0L / (static_cast<long double>(spec.R) * (1.0L - spec.tau));
  const long double beta = (1.0L + spec.tau) / (1.0L - spec.tau);
  const int degree = 2 * static_cast<int>(spec.odd_coefficients.size()) - 1;
  std::vector<long double> t_coeffs(degree + 1, 0.0L);
  t_coeffs[0] = 0.5L;
  for (std::size_t i = 0; i < spec.odd_coefficients.size(); ++i) t_coeffs[2 * i + 1] = spec.odd_coefficients[i];
  // Horner composition: q <- q * (alpha r - beta) + t_coeffs[k].
  std::vector<long double> q{t_coeffs[degree]};
  for (int k = degree - 1; k >= 0; --k) {
    std::vector<long double> next(q.size() + 1, 0.0L);
    for (std::size_t j = 0; j < q.size(); ++j) {
      next[j + 1] += alpha * q[j];
      next[j] -= beta * q[j];
    }
    next[0] += t_coeffs[k];
    q = std::move(next);
  }
  RadialPiece inner{0.0, r_inner, 0, {1.0}};
  RadialPiece blend{r_inner, spec.R, 0, std::vector<double>(q.begin(), q.end())};
  RadialPiece outer{spec.R, std::numeric_limits<double>::infinity(), 0, {}};
  return RadialField(frame, s, radial_offset, {inner, blend, outer});
}

RadialField singular_chi(const CornerFrame& frame, const CutoffSpec& spec, double s) {
  return cutoff_power_field(frame, spec, s, -s);
}

RadialField triharmonic_source(const CornerFrame& frame, double s, const CutoffSpec& spec) {
  if (spec.kind != CutoffKind::degree13_c6) {
    throw std::invalid_argument(
        "triharmonic source needs the C6 degree-13 cut-off; the quintic one leaves L2 under Delta^3");
  }
  const RadialField u = cutoff_power_field(frame, spec, s, s);
  return laplacian(laplacian(laplacian(u))).scaled(-1.0);
}

}  // namespace trifem
