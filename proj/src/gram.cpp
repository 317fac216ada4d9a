#include "mfgp/gram.hpp"

#include <span>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfgp {
namespace {

void check_width(const Matrix& X, const Kernel& kernel) {
  if (static_cast<std::size_t>(X.cols()) != kernel_input_dim(kernel))
    throw ConfigurationError("input width " + std::to_string(X.cols()) + " does not match kernel dimension " +
                             std::to_string(kernel_input_dim(kernel)));
}

// Points as contiguous columns.
std::span<const double> point(const Matrix& cols, Eigen::Index j) {
  return {cols.data() + j * cols.rows(), static_cast<std::size_t>(cols.rows())};
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

Matrix kernel_matrix(const Matrix& X, const Matrix& X2, const Kernel& kernel) {
  check_width(X, kernel);
  check_width(X2, kernel);
  const Matrix A = X.transpose();
  const Matrix B = X2.transpose();
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X2.rows();
  Matrix K(n, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto xj = point(B, j);
    for (Eigen::Index i = 0; i < n; ++i) K(i, j) = kernel_eval(kernel, point(A, i), xj);
  }
  return K;
}

Matrix kernel_matrix(const Matrix& X, const Kernel& kernel) {
  check_width(X, kernel);
  const Matrix A = X.transpose();
  const Eigen::Index n = X.rows();
  Matrix K(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = point(A, i);
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel_eval(kernel, xi, point(A, j));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Vector contract_kernel_gradient(const Matrix& X, const Kernel& kernel, const Matrix& W) {
  check_width(X, kernel);
  const Matrix A = X.transpose();
  const Eigen::Index n = X.rows();
  const auto p = static_cast<Eigen::Index>(kernel_param_count(kernel));
  // Row i owns the pairs (i, j >= i); rows are reduced serially afterwards.
  Matrix partial = Matrix::Zero(p, n);
#pragma omp parallel
  {
    Vector grad(p);
    std::span<double> g(grad.data(), static_cast<std::size_t>(p));
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto xi = point(A, i);
      auto acc = partial.col(i);
      kernel_eval_with_gradient(kernel, xi, xi, g);
      acc += W(i, i) * grad;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        kernel_eval_with_gradient(kernel, xi, point(A, j), g);
        acc += (W(i, j) + W(j, i)) * grad;
      }
    }
  }
  Vector total = Vector::Zero(p);
  for (Eigen::Index i = 0; i < n; ++i) total += partial.col(i);
  return total;
}

namespace serial {

Matrix kernel_matrix(const Matrix& X, const Matrix& X2, const Kernel& kernel) {
  check_width(X, kernel);
  check_width(X2, kernel);
  Matrix K(X.rows(), X2.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector xi = X.row(i).transpose();
    for (Eigen::Index j = 0; j < X2.rows(); ++j) {
      const Vector xj = X2.row(j).transpose();
      K(i, j) = kernel_eval(kernel, {xi.data(), static_cast<std::size_t>(xi.size())},
                            {xj.data(), static_cast<std::size_t>(xj.size())});
    }
  }
  return K;
}

Matrix kernel_matrix(const Matrix& X, const Kernel& kernel) { return serial::kernel_matrix(X, X, kernel); }

std::vector<Matrix> kernel_gradient_matrices(const Matrix& X, const Kernel& kernel) {
  check_width(X, kernel);
  const auto p = kernel_param_count(kernel);
  std::vector<Matrix> out(p, Matrix(X.rows(), X.rows()));
  Vector grad(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector xi = X.row(i).transpose();
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      const Vector xj = X.row(j).transpose();
      kernel_eval_with_gradient(kernel, {xi.data(), static_cast<std::size_t>(xi.size())},
                                {xj.data(), static_cast<std::size_t>(xj.size())}, {grad.data(), p});
      for (std::size_t q = 0; q < p; ++q) out[q](i, j) = grad[static_cast<Eigen::Index>(q)];
    }
  }
  return out;
}

Vector contract_kernel_gradient(const Matrix& X, const Kernel& kernel, const Matrix& W) {
  const auto mats = kernel_gradient_matrices(X, kernel);
  Vector out(static_cast<Eigen::Index>(mats.size()));
  for (std::size_t q = 0; q < mats.size(); ++q) out[static_cast<Eigen::Index>(q)] = W.cwiseProduct(mats[q]).sum();
  return out;
}

}  // namespace serial
}  // namespace mfgp
