// Times the OpenMP kernels against their serial references and checks that
// both produce identical output.

#include "mfgp/gram.hpp"
#include "mfgp/surrogates.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <random>

namespace {

using namespace mfgp;
using Clock = std::chrono::steady_clock;

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

bool report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-28s serial %9.4f s  parallel %9.4f s  speedup %6.2fx  %s\n", name, serial_s, parallel_s,
              serial_s / parallel_s, identical ? "identical" : "MISMATCH");
  return identical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel versus serial kernel benchmark"};
  long gram_n = 2000, grad_n = 800, knn_n = 50000, knn_q = 5000;
  int threads = 0, reps = 3;
  app.add_option("--gram-points", gram_n, "Points in the Gram-matrix benchmark");
  app.add_option("--gradient-points", grad_n, "Points in the gradient-contraction benchmark");
  app.add_option("--knn-points", knn_n, "Stored rows in the KNN benchmark");
  app.add_option("--knn-queries", knn_q, "Queries in the KNN benchmark");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)");
  app.add_option("--reps", reps, "Repetitions; the best time is reported");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_threads(threads);
  std::printf("threads: %d\n", max_threads());

  std::mt19937_64 rng(7);
  const Kernel kernel = ArdKernel{1.3, Vector::Constant(3, 0.7)};
  bool ok = true;

  {
    const Matrix X = random_matrix(rng, gram_n, 3);
    Matrix a, b;
    const double ts = best_of(reps, [&] { a = serial::kernel_matrix(X, kernel); });
    const double tp = best_of(reps, [&] { b = kernel_matrix(X, kernel); });
    ok &= report("gram matrix", ts, tp, a == b);
  }
  {
    const Matrix X = random_matrix(rng, grad_n, 3);
    Matrix W = random_matrix(rng, grad_n, grad_n);
    W = (W + W.transpose()).eval();
    Vector a, b;
    const double ts = best_of(reps, [&] { a = serial::contract_kernel_gradient(X, kernel, W); });
    const double tp = best_of(reps, [&] { b = contract_kernel_gradient(X, kernel, W); });
    ok &= report("gradient contraction", ts, tp, (a - b).cwiseAbs().maxCoeff() <= 1e-9 * b.cwiseAbs().maxCoeff());
  }
  {
    const Matrix X = random_matrix(rng, knn_n, 3);
    const Vector y = random_matrix(rng, knn_n, 1).col(0);
    const Matrix Q = random_matrix(rng, knn_q, 3);
    Vector a, b;
    const double ts = best_of(1, [&] { a = knn_scan_predict(X, y, 5, Q); });
    const double tp = best_of(reps, [&] { b = knn_fit(X, y, 5).predict(Q); });
    ok &= report("knn (scan vs k-d tree)", ts, tp, a == b);
  }
  return ok ? 0 : 1;
}
