#pragma once

#include <cstdint>
#include <random>

namespace breachcat {

// SplitMix64 finalizer; used to derive independent stream seeds from
// (base seed, stream tag, replicate index) so that parallel replicates do
// not depend on scheduling order.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return std::normal_distribution<double>{}(engine_); }
    double gamma(double shape, double scale) { return std::gamma_distribution<double>{shape, scale}(engine_); }
    std::uint64_t poisson(double mean);
    // Negative binomial with mean mu and dispersion theta (variance mu + mu^2/theta).
    std::uint64_t neg_binomial(double mu, double theta);
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>{0, n - 1}(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace breachcat
