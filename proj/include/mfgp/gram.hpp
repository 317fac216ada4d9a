#pragma once

// Data-parallel kernel assembly. The default entry points use OpenMP; the
// `serial` namespace keeps straightforward reference versions that the tests
// and the benchmark compare against. Every parallel routine writes each output
// element from exactly one thread and reduces in a fixed order, so results do
// not depend on the thread count.

#include "mfgp/kernels.hpp"
#include "mfgp/types.hpp"

#include <vector>

namespace mfgp {

/// K_ij = k(row_i(X), row_j(X2)). Throws ConfigurationError on width mismatch.
Matrix kernel_matrix(const Matrix& X, const Matrix& X2, const Kernel& kernel);
/// Symmetric Gram matrix of X with itself.
Matrix kernel_matrix(const Matrix& X, const Kernel& kernel);

/// g_j = sum_ab W_ab dK_ab/d(log theta_j) for the Gram matrix of X, where W is
/// symmetric. This is the contraction needed by the marginal-likelihood gradient.
Vector contract_kernel_gradient(const Matrix& X, const Kernel& kernel, const Matrix& W);

/// Number of threads OpenMP will use (1 when built without OpenMP).
int max_threads();
/// Sets the thread count; affects speed only.
void set_threads(int n);

namespace serial {

Matrix kernel_matrix(const Matrix& X, const Matrix& X2, const Kernel& kernel);
Matrix kernel_matrix(const Matrix& X, const Kernel& kernel);
/// dK/d(log theta_j) as dense matrices, one per kernel parameter.
std::vector<Matrix> kernel_gradient_matrices(const Matrix& X, const Kernel& kernel);
Vector contract_kernel_gradient(const Matrix& X, const Kernel& kernel, const Matrix& W);

}  // namespace serial

}  // namespace mfgp
