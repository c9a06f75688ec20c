#include "trifem/sparse.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace trifem {

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto begin = cols.begin() + row_offsets[i];
  const auto end = cols.begin() + row_offsets[i + 1];
  const auto it = std::lower_bound(begin, end, static_cast<int>(j));
  if (it == end || *it != static_cast<int>(j)) return 0.0;
  return values[it - cols.begin()];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) s += values[k] * x[cols[k]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n);
  multiply(x, y);
  return y;
}

double CsrMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) row += values[k] * y[cols[k]];
    s += x[i] * row;
  }
  return s;
}

double CsrMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      const double a = values[k];
      const double b = at(cols[k], i);
      const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
      worst = std::max(worst, std::abs(a - b) / scale);
    }
  }
  return worst;
}

void write_coordinate(std::ostream& out, const CsrMatrix& a) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      out << i << ' ' << a.cols[k] << ' ' << a.values[k] << '\n';
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> solve_spd(const CsrMatrix& a, std::span<const double> rhs, const CgOptions& options,
                              CgReport* report) {
  const std::size_t n = a.n;
  std::vector<double> x(n, 0.0);
  const double bnorm = norm2(rhs);
  if (report) *report = {};
  if (n == 0 || bnorm == 0.0) return x;

  const int max_it = options.max_iterations > 0
                         ? options.max_iterations
                         : static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 1000;
  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("matrix has a non-positive diagonal entry", 1.0);
    d = 1.0 / d;
  }

  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  for (int it = 1; it <= max_it; ++it) {
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw SolverError("conjugate gradients broke down: matrix not positive definite", rel);
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rel = norm2(r) / bnorm;
    if (rel <= options.tol) {
      if (report) *report = {it, rel};
      return x;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  std::ostringstream msg;
  msg << "conjugate gradients did not converge in " << max_it << " iterations (relative residual " << rel
      << ")";
  throw SolverError(msg.str(), rel);
}

struct SpdFactorization::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  std::size_t n = 0;
};

SpdFactorization::SpdFactorization(const CsrMatrix& a) : impl_(std::make_unique<Impl>()) {
  impl_->n = a.n;
  if (a.n == 0) return;
  // CSR of a symmetric matrix is also its CSC.
  const Eigen::Map<const Eigen::SparseMatrix<double>> view(
      static_cast<Eigen::Index>(a.n), static_cast<Eigen::Index>(a.n), static_cast<Eigen::Index>(a.nnz()),
      a.row_offsets.data(), a.cols.data(), a.values.data());
  impl_->ldlt.compute(view);
  if (impl_->ldlt.info() != Eigen::Success) {
    throw SolverError("sparse LDL^T factorisation failed: matrix not positive definite", 1.0);
  }
  const auto d = impl_->ldlt.vectorD();
  if ((d.array() <= 0.0).any()) {
    throw SolverError("sparse LDL^T factorisation found a non-positive pivot", 1.0);
  }
}

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

std::vector<double> SpdFactorization::solve(std::span<const double> rhs) const {
  std::vector<double> x(impl_->n, 0.0);
  if (impl_->n == 0) return x;
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) = impl_->ldlt.solve(b);
  return x;
}

}  // namespace trifem
