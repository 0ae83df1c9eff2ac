#include "wcpd/cpd.hpp"

#include "wcpd/errors.hpp"
#include "wcpd/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wcpd {

namespace {

class SortedWindow {
public:
    void insert(double v) { data_.insert(std::upper_bound(data_.begin(), data_.end(), v), v); }
    void erase(double v) { data_.erase(std::lower_bound(data_.begin(), data_.end(), v)); }
    std::span<const double> view() const noexcept { return data_; }

private:
    std::vector<double> data_;
};

double sorted_linear_cost(std::span<const double> x, std::span<const double> y) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sum += d * d;
    }
    return sum / static_cast<double>(x.size());
}

// np.gradient convention: one-sided at the ends, central elsewhere.
std::vector<double> discrete_gradient(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<double> g(n, 0.0);
    if (n < 2) {
        return g;
    }
    g[0] = v[1] - v[0];
    g[n - 1] = v[n - 1] - v[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        g[i] = 0.5 * (v[i + 1] - v[i - 1]);
    }
    return g;
}

} // namespace

TimeSeries::TimeSeries(std::vector<double> values) : values_{std::move(values)} {
    if (values_.empty()) {
        throw InvalidInput("time series must contain at least one observation");
    }
    for (std::size_t t = 0; t < values_.size(); ++t) {
        if (!std::isfinite(values_[t])) {
            throw InvalidInput("time series value at t=" + std::to_string(t) + " is not finite");
        }
    }
}

Geometry Geometry::circular(double period) {
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw InvalidParameter("circular period must be positive and finite");
    }
    return {Kind::circular, period};
}

ChangePointSet::ChangePointSet(std::vector<std::size_t> indices, std::size_t length)
    : indices_{std::move(indices)} {
    for (std::size_t i : indices_) {
        if (i > length) {
            throw InvalidInput("change point " + std::to_string(i) + " outside [0, " +
                               std::to_string(length) + "]");
        }
    }
    indices_.push_back(0);
    indices_.push_back(length);
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

std::vector<std::size_t> ChangePointSet::interior() const {
    if (indices_.size() <= 2) {
        return {};
    }
    return {indices_.begin() + 1, indices_.end() - 1};
}

MetricDerivativeSeries metric_derivative(const TimeSeries& series, std::size_t window,
                                         const Geometry& geometry, bool unnormalized) {
    const std::size_t n = series.size();
    if (window < 1 || window > n / 2) {
        throw InvalidParameter("window must satisfy 1 <= w <= floor(T/2); got w=" +
                               std::to_string(window) + ", T=" + std::to_string(n));
    }

    std::vector<double> x(series.values().begin(), series.values().end());
    if (geometry.is_circular()) {
        for (double& v : x) {
            v = wrap_angle(v, geometry.period);
        }
    }

    MetricDerivativeSeries out;
    out.window = window;
    out.offset = window;
    out.series_length = n;
    out.speeds.resize(n - 2 * window);

    SortedWindow trailing;
    SortedWindow leading;
    for (std::size_t i = 0; i < window; ++i) {
        trailing.insert(x[i]);
        leading.insert(x[window + i]);
    }

    const double scale = unnormalized ? std::sqrt(static_cast<double>(window)) : 1.0;
    for (std::size_t t = window; t + window < n; ++t) {
        if (t > window) {
            // Slide both windows from t-1 to t.
            trailing.erase(x[t - 1 - window]);
            trailing.insert(x[t - 1]);
            leading.erase(x[t - 1]);
            leading.insert(x[t + window - 1]);
        }
        const double cost = geometry.is_circular()
                                ? detail::circular_sorted(trailing.view(), leading.view(), geometry.period)
                                : sorted_linear_cost(trailing.view(), leading.view());
        out.speeds[t - window] = scale * std::sqrt(std::max(cost, 0.0));
    }
    return out;
}

double empirical_quantile(std::span<const double> values, double q) {
    if (values.empty()) {
        throw InvalidInput("quantile of an empty sequence");
    }
    std::vector<double> sorted(values.begin(), values.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    // Guard against q (n - 1) landing a rounding error above an integer.
    auto rank = static_cast<std::size_t>(std::ceil(pos - 1e-9 * std::max(1.0, pos)));
    rank = std::min(rank, sorted.size() - 1);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
    return sorted[rank];
}

ThresholdResult quantile_threshold(const MetricDerivativeSeries& speeds, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidParameter("quantile must lie in (0, 1); got " + std::to_string(q));
    }
    if (speeds.speeds.empty()) {
        throw InvalidInput("quantile_threshold: empty speed series");
    }
    ThresholdResult result;
    result.threshold = empirical_quantile(speeds.speeds, q);
    const auto [lo, hi] = std::minmax_element(speeds.speeds.begin(), speeds.speeds.end());
    if (*lo == *hi) {
        return result;
    }
    // A threshold at the floor would admit every floor value; only speeds above it count.
    const bool strict = result.threshold == *lo;
    for (std::size_t k = 0; k < speeds.speeds.size(); ++k) {
        if (strict ? speeds.speeds[k] > result.threshold : speeds.speeds[k] >= result.threshold) {
            result.candidates.push_back(speeds.time_of(k));
        }
    }
    return result;
}

ChangePointSet extract_inflection_points(const MetricDerivativeSeries& speeds,
                                         std::span<const std::size_t> candidates,
                                         InflectionMode mode) {
    const std::size_t length = speeds.series_length;
    std::vector<double> gradient;
    if (mode == InflectionMode::gradient) {
        gradient = discrete_gradient(speeds.speeds);
    }
    const std::vector<double>& score = mode == InflectionMode::gradient ? gradient : speeds.speeds;

    std::vector<std::size_t> points;
    std::size_t i = 0;
    while (i < candidates.size()) {
        std::size_t j = i + 1;
        while (j < candidates.size() && candidates[j] == candidates[j - 1] + 1) {
            ++j;
        }
        std::size_t arg_min = candidates[i];
        std::size_t arg_max = candidates[i];
        for (std::size_t c = i; c < j; ++c) {
            const std::size_t t = candidates[c];
            if (t < speeds.offset || t - speeds.offset >= score.size()) {
                throw InvalidInput("candidate time " + std::to_string(t) + " outside the speed range");
            }
            const double v = score[t - speeds.offset];
            if (v < score[arg_min - speeds.offset]) {
                arg_min = t;
            }
            if (v > score[arg_max - speeds.offset]) {
                arg_max = t;
            }
        }
        points.push_back(arg_min);
        points.push_back(arg_max);
        i = j;
    }
    return ChangePointSet{std::move(points), length};
}

Detection detect_change_points(const TimeSeries& series, const DetectOptions& options) {
    auto speeds = metric_derivative(series, options.window, options.geometry, options.unnormalized);
    if (speeds.speeds.empty()) {
        if (!(options.quantile > 0.0 && options.quantile < 1.0)) {
            throw InvalidParameter("quantile must lie in (0, 1); got " + std::to_string(options.quantile));
        }
        ChangePointSet bounds{{}, series.size()};
        return {std::move(speeds), ThresholdResult{}, std::move(bounds)};
    }
    auto threshold = quantile_threshold(speeds, options.quantile);
    auto cps = extract_inflection_points(speeds, threshold.candidates, options.inflection);
    return {std::move(speeds), std::move(threshold), std::move(cps)};
}

} // namespace wcpd
