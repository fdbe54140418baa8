#include "breachcat/rng.hpp"

#include <cmath>

namespace breachcat {

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

std::uint64_t Rng::poisson(double mean)
{
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::uint64_t>{mean}(engine_);
}

std::uint64_t Rng::neg_binomial(double mu, double theta)
{
    if (!(mu > 0.0)) return 0;
    if (!std::isfinite(theta)) return poisson(mu);
    return poisson(gamma(theta, mu / theta));
}

} // namespace breachcat
