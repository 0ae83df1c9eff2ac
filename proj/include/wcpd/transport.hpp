#pragma once

// Exact one-dimensional optimal transport costs.
//
// All squared distances carry the 1/n mass factor, so the sorted-sample and
// quantile-function routes return the same value and costs of windows with
// different sizes remain comparable.

#include <cstddef>
#include <span>
#include <vector>

namespace wcpd {

/// Uniform empirical measure on the line: n atoms of mass 1/n, kept sorted.
class EmpiricalMeasure1D {
public:
    /// Sorts `samples`. Throws InvalidInput when empty or non-finite.
    explicit EmpiricalMeasure1D(std::vector<double> samples);

    std::span<const double> support() const noexcept { return support_; }
    std::size_t size() const noexcept { return support_.size(); }

private:
    std::vector<double> support_;
};

/// Uniform empirical measure on the circle [0, period).
class CircularMeasure {
public:
    /// Requires every angle in [0, period). Use `wrap` first for raw angles.
    CircularMeasure(std::vector<double> angles, double period);

    /// Reduces arbitrary finite angles into [0, period) before construction.
    static CircularMeasure wrap(std::span<const double> angles, double period);

    std::span<const double> support() const noexcept { return support_; }
    std::size_t size() const noexcept { return support_.size(); }
    double period() const noexcept { return period_; }

private:
    std::vector<double> support_;
    double period_;
};

/// Discrete measure with arbitrary nonnegative weights summing to one.
class WeightedMeasure1D {
public:
    /// `support` must be ascending; weights nonnegative with sum 1 (to 1e-12).
    WeightedMeasure1D(std::vector<double> support, std::vector<double> weights);

    std::span<const double> support() const noexcept { return support_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return support_.size(); }

private:
    std::vector<double> support_;
    std::vector<double> weights_;
};

/// Reduces `x` into [0, period).
double wrap_angle(double x, double period);

/// W2^2 between equal-size uniform measures: (1/n) * sum (x_(i) - y_(i))^2.
/// Throws InvalidInput on a size mismatch; use w2_squared_quantile instead.
double w2_squared_equal(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu);

/// Exact optimum over all n! couplings of equal-size uniform measures; reference
/// for the sorted formula. Throws InvalidParameter for n > kBruteForceLimit.
double w2_squared_brute_force(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu);
inline constexpr std::size_t kBruteForceLimit = 8;

/// Integral over u in [0,1] of |F_mu^-1(u) - F_nu^-1(u)|^2, computed exactly by
/// merging the breakpoints of both quantile step functions.
double w2_squared_quantile(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu);
double w2_squared_quantile(const WeightedMeasure1D& mu, const WeightedMeasure1D& nu);
double w2_squared_quantile(const EmpiricalMeasure1D& mu, const WeightedMeasure1D& nu);

/// W2^2 on the circle for equal-size uniform measures with geodesic cost.
///
/// The optimal coupling is a cyclic shift of the sorted supports. Up to
/// `kExhaustiveCircularLimit` atoms every shift is scanned; beyond that the
/// lifted shift cost, which is convex, is minimised by integer ternary search.
double w2_squared_circular(const CircularMeasure& mu, const CircularMeasure& nu);

/// Circular W2^2 for measures of any sizes. Minimises the convex lifted cost
/// over a continuous quantile shift; exact up to the search tolerance (~1e-13
/// in the shift).
double w2_squared_circular_quantile(const CircularMeasure& mu, const CircularMeasure& nu);

inline constexpr std::size_t kExhaustiveCircularLimit = 512;

namespace detail {
// Lifted cost of pairing x_(i) with y_(i+shift) (indices wrap, wrapped atoms
// lifted by multiples of the period). Exposed for tests of the fast path.
double circular_shift_cost(std::span<const double> x, std::span<const double> y,
                           double period, long shift);
double circular_ternary(std::span<const double> x, std::span<const double> y, double period);
// Circular W2^2 on already sorted, wrapped, equal-size supports.
double circular_sorted(std::span<const double> x, std::span<const double> y, double period);
} // namespace detail

} // namespace wcpd
