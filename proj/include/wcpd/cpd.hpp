#pragma once

// Sliding-window change point detection driven by the estimated Wasserstein
// metric derivative of the law of a time series.

#include <cstddef>
#include <span>
#include <vector>

namespace wcpd {

/// Real observations X_0 .. X_{T-1}; T >= 1, all finite.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t t) const { return values_[t]; }

private:
    std::vector<double> values_;
};

/// Value space of one channel: the real line, or a circle of given period.
struct Geometry {
    enum class Kind { linear, circular };

    Kind kind = Kind::linear;
    double period = 0.0;

    static Geometry linear() { return {}; }
    static Geometry circular(double period);

    bool is_circular() const noexcept { return kind == Kind::circular; }
    bool operator==(const Geometry&) const = default;
};

/// Estimated speed |d gamma/dt| at times offset .. offset + speeds.size() - 1.
struct MetricDerivativeSeries {
    std::vector<double> speeds;
    std::size_t window = 0;
    std::size_t offset = 0;
    /// Length of the series the speeds were computed from.
    std::size_t series_length = 0;

    std::size_t time_of(std::size_t k) const noexcept { return offset + k; }
};

/// Strictly increasing change point times in [0, T]; always holds 0 and T.
class ChangePointSet {
public:
    /// Adds the boundaries 0 and `length`, sorts and removes duplicates.
    /// Throws InvalidInput for indices outside [0, length].
    ChangePointSet(std::vector<std::size_t> indices, std::size_t length);
    /// The trivial set {0} of an empty series.
    ChangePointSet() : ChangePointSet({}, 0) {}

    std::span<const std::size_t> indices() const noexcept { return indices_; }
    std::size_t length() const noexcept { return indices_.back(); }
    /// Change points without the boundaries 0 and T.
    std::vector<std::size_t> interior() const;

private:
    std::vector<std::size_t> indices_;
};

enum class InflectionMode {
    /// Extrema of the speed values inside each candidate run.
    value,
    /// Extrema of the discrete speed gradient inside each candidate run.
    gradient,
};

struct ThresholdResult {
    double threshold = 0.0;
    /// Candidate times in series coordinates, ascending.
    std::vector<std::size_t> candidates;
};

struct DetectOptions {
    std::size_t window = 25;
    double quantile = 0.95;
    Geometry geometry{};
    InflectionMode inflection = InflectionMode::value;
    /// Report speeds as sqrt(sum of squared gaps) instead of the mass-normalised
    /// distance; this multiplies every speed by sqrt(window).
    bool unnormalized = false;
};

struct Detection {
    MetricDerivativeSeries speeds;
    ThresholdResult threshold;
    ChangePointSet change_points;
};

/// speeds[t - w] = W2(values[t-w, t), values[t, t+w)) for t in [w, T - w).
/// Requires 1 <= w <= T/2; throws InvalidParameter otherwise.
MetricDerivativeSeries metric_derivative(const TimeSeries& series, std::size_t window,
                                         const Geometry& geometry = {}, bool unnormalized = false);

/// Empirical quantile used for thresholding: the order statistic at 0-based
/// rank ceil(q (n - 1)) of `values`.
double empirical_quantile(std::span<const double> values, double q);

/// Candidate times whose speed reaches the q-quantile of all speeds.
/// A constant speed series yields no candidates; when the quantile equals the
/// minimum speed only strictly larger speeds are candidates.
ThresholdResult quantile_threshold(const MetricDerivativeSeries& speeds, double q);

/// Splits candidates into runs of consecutive times and reports argmin and
/// argmax of each run (earliest on ties), plus the boundaries 0 and T.
ChangePointSet extract_inflection_points(const MetricDerivativeSeries& speeds,
                                         std::span<const std::size_t> candidates,
                                         InflectionMode mode = InflectionMode::value);

Detection detect_change_points(const TimeSeries& series, const DetectOptions& options);

} // namespace wcpd
