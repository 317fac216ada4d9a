#pragma once

// The three-level one-dimensional test problem:
//   level 1: sin(2 pi x) exp(-x), level 2: sin(2 pi x), level 3: exp(-x),
// with (10, 100, 250) training points on [0, 5] and a 250-point linspace test
// grid evaluated with the level-1 function.

#include "mfgp/dataset.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace mfgp {

enum class Sampling { Linspace, Uniform };
const char* to_string(Sampling s);
Sampling sampling_from_string(const std::string& name);

struct AnalyticOptions {
  Sampling high = Sampling::Linspace;  // level 1
  Sampling low = Sampling::Linspace;   // levels 2 and 3
  std::array<std::size_t, 3> sizes{10, 100, 250};
  double lower = 0.0;
  double upper = 5.0;
  std::size_t test_points = 250;
};

struct AnalyticProblem {
  MFDataset train;
  DataSet test;
};

/// Level function in 1-based fidelity numbering (1..3).
double analytic_level(std::size_t level, double x);

/// `count` evenly spaced points on [lower, upper], both ends included.
Vector linspace(double lower, double upper, std::size_t count);

/// Uniform draws come from a 64-bit Mersenne twister seeded per level from
/// `seed`, mapped to [lower, upper) with 53 random bits.
AnalyticProblem gen_analytic(std::uint64_t seed, const AnalyticOptions& opts = {});

}  // namespace mfgp
