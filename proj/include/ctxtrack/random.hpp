#pragma once

#include "ctxtrack/geometry.hpp"

#include <cstdint>
#include <random>

namespace ctxtrack {

using Rng = std::mt19937_64;

/// Independent, reproducible stream derived from a master seed and a stream label.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Per-trial seed for trial `index` of a batch seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);
bool bernoulli(Rng& rng, double p);

/// Sample from N(mean, cov) given a square-root factor `root` with root * root^T = cov.
Vec2 sample_gaussian(Rng& rng, const Vec2& mean, const Mat2& root);

/// Symmetric square root of a positive semidefinite 2x2 matrix.
Mat2 psd_sqrt(const Mat2& cov);

}  // namespace ctxtrack
