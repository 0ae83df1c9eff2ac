#include "wcpd/transport.hpp"

#include "wcpd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wcpd {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InvalidInput(std::string{what} + ": non-finite sample");
        }
    }
}

// Piecewise-constant quantile function: value support[i] on [cum[i], cum[i+1]).
struct QuantileSteps {
    std::span<const double> support;
    std::vector<double> cum;
};

QuantileSteps uniform_steps(std::span<const double> support) {
    const std::size_t n = support.size();
    std::vector<double> cum(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        cum[i] = static_cast<double>(i) / static_cast<double>(n);
    }
    return {support, std::move(cum)};
}

QuantileSteps weighted_steps(const WeightedMeasure1D& m) {
    std::vector<double> cum(m.size() + 1, 0.0);
    std::partial_sum(m.weights().begin(), m.weights().end(), cum.begin() + 1);
    // Pin the total to exactly one so both walks end together.
    for (double& c : cum) {
        c = std::min(c, 1.0);
    }
    cum.back() = 1.0;
    return {m.support(), std::move(cum)};
}

double merge_quantiles(const QuantileSteps& a, const QuantileSteps& b) {
    const std::size_t n = a.support.size();
    const std::size_t m = b.support.size();
    std::size_t i = 0;
    std::size_t j = 0;
    double t = 0.0;
    double cost = 0.0;
    while (i < n && j < m) {
        const double hi = std::min(a.cum[i + 1], b.cum[j + 1]);
        const double d = a.support[i] - b.support[j];
        cost += (hi - t) * d * d;
        t = hi;
        if (a.cum[i + 1] <= hi) {
            ++i;
        }
        if (b.cum[j + 1] <= hi) {
            ++j;
        }
    }
    return cost;
}

long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

// Integral over t in [0,1) of (F^-1(t) - G~(t + alpha))^2 where G~ is the
// quantile function of `b` extended by G~(s + 1) = G~(s) + period.
double lifted_cost(const QuantileSteps& a, const QuantileSteps& b, double period, double alpha) {
    const std::size_t n = a.support.size();
    const std::size_t m = b.support.size();

    double k = std::floor(alpha);
    const double frac = alpha - k;
    auto it = std::upper_bound(b.cum.begin(), b.cum.end(), frac);
    std::size_t j = static_cast<std::size_t>(std::distance(b.cum.begin(), it));
    j = j == 0 ? 0 : j - 1;
    if (j >= m) {
        j = 0;
        k += 1.0;
    }
    // Skip zero-mass atoms at the start position.
    while (b.cum[j + 1] + k - alpha <= 0.0) {
        if (++j == m) {
            j = 0;
            k += 1.0;
        }
    }

    double tb = b.cum[j + 1] + k - alpha;
    std::size_t i = 0;
    double t = 0.0;
    double cost = 0.0;
    while (t < 1.0 && i < n) {
        const double ta = a.cum[i + 1];
        const double next = std::min({ta, tb, 1.0});
        const double d = a.support[i] - (b.support[j] + k * period);
        cost += (next - t) * d * d;
        t = next;
        if (ta <= next) {
            ++i;
        }
        if (tb <= next) {
            if (++j == m) {
                j = 0;
                k += 1.0;
            }
            tb = b.cum[j + 1] + k - alpha;
        }
    }
    return cost;
}

void require_same_circle(const CircularMeasure& mu, const CircularMeasure& nu) {
    if (mu.period() != nu.period()) {
        throw InvalidInput("circular measures have different periods");
    }
}

} // namespace

EmpiricalMeasure1D::EmpiricalMeasure1D(std::vector<double> samples) : support_{std::move(samples)} {
    if (support_.empty()) {
        throw InvalidInput("empirical measure needs at least one sample");
    }
    require_finite(support_, "empirical measure");
    std::stable_sort(support_.begin(), support_.end());
}

double wrap_angle(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0) {
        r += period;
    }
    // fmod of a tiny negative value can round up to exactly `period`.
    if (r >= period) {
        r = 0.0;
    }
    return r;
}

CircularMeasure::CircularMeasure(std::vector<double> angles, double period)
    : support_{std::move(angles)}, period_{period} {
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
        throw InvalidInput("circular measure period must be positive and finite");
    }
    if (support_.empty()) {
        throw InvalidInput("circular measure needs at least one sample");
    }
    require_finite(support_, "circular measure");
    for (double a : support_) {
        if (a < 0.0 || a >= period_) {
            throw InvalidInput("circular measure angle outside [0, period): " + std::to_string(a));
        }
    }
    std::stable_sort(support_.begin(), support_.end());
}

CircularMeasure CircularMeasure::wrap(std::span<const double> angles, double period) {
    if (!(period > 0.0)) {
        throw InvalidInput("circular measure period must be positive");
    }
    std::vector<double> wrapped(angles.size());
    std::transform(angles.begin(), angles.end(), wrapped.begin(),
                   [period](double a) { return wrap_angle(a, period); });
    return CircularMeasure{std::move(wrapped), period};
}

WeightedMeasure1D::WeightedMeasure1D(std::vector<double> support, std::vector<double> weights)
    : support_{std::move(support)}, weights_{std::move(weights)} {
    if (support_.empty()) {
        throw InvalidInput("weighted measure needs at least one atom");
    }
    if (support_.size() != weights_.size()) {
        throw InvalidInput("weighted measure: support and weights differ in length");
    }
    require_finite(support_, "weighted measure");
    if (!std::is_sorted(support_.begin(), support_.end())) {
        throw InvalidInput("weighted measure support must be ascending");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidInput("weighted measure weights must be finite and nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidInput("weighted measure weights must sum to 1, got " + std::to_string(total));
    }
}

double w2_squared_equal(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu) {
    if (mu.size() != nu.size()) {
        throw InvalidInput("w2_squared_equal: sizes differ (" + std::to_string(mu.size()) + " vs " +
                           std::to_string(nu.size()) + "); use w2_squared_quantile");
    }
    const auto x = mu.support();
    const auto y = nu.support();
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sum += d * d;
    }
    return sum / static_cast<double>(x.size());
}

double w2_squared_brute_force(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu) {
    if (mu.size() != nu.size()) {
        throw InvalidInput("w2_squared_brute_force: sizes differ (" + std::to_string(mu.size()) + " vs " +
                           std::to_string(nu.size()) + ")");
    }
    if (mu.size() > kBruteForceLimit) {
        throw InvalidParameter("w2_squared_brute_force: n = " + std::to_string(mu.size()) + " exceeds " +
                               std::to_string(kBruteForceLimit));
    }
    const auto x = mu.support();
    const auto y = nu.support();
    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[perm[i]];
            sum += d * d;
        }
        best = std::min(best, sum);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(x.size());
}

double w2_squared_quantile(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu) {
    return merge_quantiles(uniform_steps(mu.support()), uniform_steps(nu.support()));
}

double w2_squared_quantile(const WeightedMeasure1D& mu, const WeightedMeasure1D& nu) {
    return merge_quantiles(weighted_steps(mu), weighted_steps(nu));
}

double w2_squared_quantile(const EmpiricalMeasure1D& mu, const WeightedMeasure1D& nu) {
    return merge_quantiles(uniform_steps(mu.support()), weighted_steps(nu));
}

namespace detail {

double circular_shift_cost(std::span<const double> x, std::span<const double> y, double period,
                           long shift) {
    const long n = static_cast<long>(x.size());
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
        const long idx = i + shift;
        const long lift = floor_div(idx, n);
        const double target = y[static_cast<std::size_t>(idx - lift * n)] +
                              static_cast<double>(lift) * period;
        const double d = x[static_cast<std::size_t>(i)] - target;
        sum += d * d;
    }
    return sum / static_cast<double>(n);
}

double circular_ternary(std::span<const double> x, std::span<const double> y, double period) {
    // The lifted cost is convex in the shift; a convex sequence is flat only
    // at its minimum, so equal probes bracket the minimiser.
    long lo = -static_cast<long>(x.size());
    long hi = static_cast<long>(x.size());
    while (hi - lo > 2) {
        const long m1 = lo + (hi - lo) / 3;
        const long m2 = hi - (hi - lo) / 3;
        const double f1 = circular_shift_cost(x, y, period, m1);
        const double f2 = circular_shift_cost(x, y, period, m2);
        if (f1 < f2) {
            hi = m2 - 1;
        } else if (f1 > f2) {
            lo = m1 + 1;
        } else {
            lo = m1;
            hi = m2;
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (long k = lo; k <= hi; ++k) {
        best = std::min(best, circular_shift_cost(x, y, period, k));
    }
    return best;
}

double circular_sorted(std::span<const double> x, std::span<const double> y, double period) {
    const std::size_t n = x.size();
    if (n > kExhaustiveCircularLimit) {
        return circular_ternary(x, y, period);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + k;
            if (j >= n) {
                j -= n;
            }
            double d = std::abs(x[i] - y[j]);
            d = std::min(d, period - d);
            sum += d * d;
        }
        best = std::min(best, sum);
    }
    return best / static_cast<double>(n);
}

} // namespace detail

double w2_squared_circular(const CircularMeasure& mu, const CircularMeasure& nu) {
    require_same_circle(mu, nu);
    if (mu.size() != nu.size()) {
        throw InvalidInput("w2_squared_circular: sizes differ (" + std::to_string(mu.size()) +
                           " vs " + std::to_string(nu.size()) + ")");
    }
    return detail::circular_sorted(mu.support(), nu.support(), mu.period());
}

double w2_squared_circular_quantile(const CircularMeasure& mu, const CircularMeasure& nu) {
    require_same_circle(mu, nu);
    const QuantileSteps a = uniform_steps(mu.support());
    const QuantileSteps b = uniform_steps(nu.support());
    const double period = mu.period();

    // Optimal shifts align the means, which lie in [0, period), so |alpha| < 1.
    double lo = -2.0;
    double hi = 2.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (lifted_cost(a, b, period, m1) <= lifted_cost(a, b, period, m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    return lifted_cost(a, b, period, 0.5 * (lo + hi));
}

} // namespace wcpd
