#pragma once

#include <cstdint>
#include <random>

namespace wcpd {

/// Seedable, splittable generator with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms unspecified:
/// uniforms use the top 53 bits, normals use Box-Muller, Laplace uses the
/// inverse CDF. Child streams are derived with SplitMix64 so that
/// split(k) of the same parent is always the same sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent child generator for stream `stream`.
    Rng split(std::uint64_t stream) const;

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Laplace(location, scale) by inverse CDF.
    double laplace(double location, double scale);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace wcpd
