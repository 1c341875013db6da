#include "spectrade/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace spectrade {

namespace {

constexpr double kPoissonChunk = 500.0;

std::uint64_t poisson_inversion(Rng& rng, double mean) {
  const double u = rng.uniform01();
  std::uint64_t k = 0;
  double pmf = std::exp(-mean);
  double cdf = pmf;
  while (u >= cdf) {
    ++k;
    pmf *= mean / static_cast<double>(k);
    const double next = cdf + pmf;
    if (next == cdf) break;  // tail below double resolution
    cdf = next;
  }
  return k;
}

}  // namespace

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  return lo + (hi - lo) * uniform01();
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::domain_error("poisson: mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  std::uint64_t total = 0;
  while (mean > kPoissonChunk) {
    total += poisson_inversion(*this, kPoissonChunk);
    mean -= kPoissonChunk;
  }
  return total + poisson_inversion(*this, mean);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(root);
  for (std::uint64_t key : keys) {
    h = splitmix64(h ^ splitmix64(key + 0x632be59bd9b4e019ULL));
  }
  return h;
}

}  // namespace spectrade
