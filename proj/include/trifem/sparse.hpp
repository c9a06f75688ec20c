#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace trifem {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Square matrix in compressed sparse row form; column indices sorted per row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<int> row_offsets{0};
  std::vector<int> cols;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const;
  double max_asymmetry() const;
};

/// Coordinate text dump: one "i j value" line per stored entry.
void write_coordinate(std::ostream& out, const CsrMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct CgOptions {
  double tol = 1e-10;
  /// Zero selects the default 20 * sqrt(n) + 1000.
  int max_iterations = 0;
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
/// Throws SolverError when the relative residual does not reach tol.
std::vector<double> solve_spd(const CsrMatrix& a, std::span<const double> rhs, const CgOptions& options = {},
                              CgReport* report = nullptr);

/// Sparse LDL^T factorisation of an SPD matrix, reusable across right-hand sides.
class SpdFactorization {
 public:
  explicit SpdFactorization(const CsrMatrix& a);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trifem
