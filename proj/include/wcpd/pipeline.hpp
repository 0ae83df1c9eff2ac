#pragma once

// Segment-based metastable state identification: change points split the
// series into segments, segments are compared as empirical measures, and
// density peaks clustering of the segments labels every point.

#include "wcpd/clustering.hpp"
#include "wcpd/cpd.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wcpd {

/// Contiguous half-open segments [start, end) covering [0, T) in order.
struct Segmentation {
    ChangePointSet boundaries;
    std::vector<std::pair<std::size_t, std::size_t>> segments;
};

Segmentation segment(const TimeSeries& series, const ChangePointSet& change_points);

struct PipelineOptions {
    std::size_t window = 25;
    double quantile = 0.95;
    InflectionMode inflection = InflectionMode::value;
    bool unnormalized = false;
    double sigma = 1.0;
    DensityPeaksOptions density{};
};

struct StateIdentification {
    Detection detection;
    Segmentation segmentation;
    DistanceMatrix distances{0};
    SimilarityMatrix similarity{0, 1.0};
    ClusterResult clusters;
    /// Cluster id of each point's parent segment.
    std::vector<int> point_labels;
    /// Number of segment-pair transport evaluations performed.
    std::size_t distance_evaluations = 0;
};

StateIdentification identify_states_1d(const TimeSeries& series, const PipelineOptions& options,
                                       const Geometry& geometry = {});

/// D channels of equal length T with a geometry per channel.
class MultiSeries {
public:
    MultiSeries(std::vector<std::vector<double>> channels, std::vector<Geometry> geometry);

    std::size_t dimension() const noexcept { return channels_.size(); }
    std::size_t length() const noexcept { return channels_.front().size(); }
    const std::vector<double>& channel(std::size_t d) const { return channels_[d]; }
    const Geometry& geometry(std::size_t d) const { return geometry_[d]; }

private:
    std::vector<std::vector<double>> channels_;
    std::vector<Geometry> geometry_;
};

/// Per-channel replacements for the shared window and quantile.
struct ChannelOverride {
    std::optional<std::size_t> window;
    std::optional<double> quantile;
};

/// Per-point tuples of channel labels.
struct LabeledTrajectory {
    /// channel_labels[d][t]
    std::vector<std::vector<int>> channel_labels;

    std::size_t length() const { return channel_labels.empty() ? 0 : channel_labels.front().size(); }
    std::vector<int> tuple(std::size_t t) const;
    /// Canonical rendering "l0-l1-...-l{D-1}".
    std::string composite(std::size_t t) const;
};

struct MultiStateIdentification {
    std::vector<StateIdentification> channels;
    LabeledTrajectory labels;
};

/// Runs identify_states_1d independently per channel and zips the labels.
/// Errors are rethrown with the failing channel index in the message.
MultiStateIdentification identify_states_multi(const MultiSeries& series, const PipelineOptions& options,
                                               std::span<const ChannelOverride> overrides = {});

} // namespace wcpd
