#include "ctxtrack/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ctxtrack {

namespace {

// splitmix64 finalizer, used only to decorrelate (seed, stream) pairs.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return mix(mix(seed) + index); }

// The std distributions are implementation-defined; these keep draws identical
// for a given engine state regardless of the standard library.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double standard_normal(Rng& rng) {
  // Box-Muller, one value per call.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

Vec2 sample_gaussian(Rng& rng, const Vec2& mean, const Mat2& root) {
  const double a = standard_normal(rng);
  const double b = standard_normal(rng);
  return mean + root * Vec2(a, b);
}

Mat2 psd_sqrt(const Mat2& cov) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (cov + cov.transpose()));
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace ctxtrack
