#include "wcpd/random.hpp"

#include <cmath>
#include <numbers>

namespace wcpd {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_{seed}, engine_{splitmix64(seed)} {}

Rng Rng::split(std::uint64_t stream) const {
    return Rng{splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL))};
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    double u = 0.0;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

double Rng::laplace(double location, double scale) {
    // u in (-1/2, 1/2); x = m - b sgn(u) ln(1 - 2|u|)
    const double u = uniform_open() - 0.5;
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return location - scale * sign * std::log1p(-2.0 * std::abs(u));
}

std::uint64_t Rng::below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

} // namespace wcpd
