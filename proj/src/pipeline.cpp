#include "wcpd/pipeline.hpp"

#include "wcpd/errors.hpp"
#include "wcpd/parallel.hpp"

#include <exception>
#include <string>

namespace wcpd {

Segmentation segment(const TimeSeries& series, const ChangePointSet& change_points) {
    if (change_points.length() != series.size()) {
        throw InvalidInput("change point set ends at " + std::to_string(change_points.length()) +
                           " but the series has length " + std::to_string(series.size()));
    }
    Segmentation s{change_points, {}};
    const auto idx = change_points.indices();
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        s.segments.emplace_back(idx[i], idx[i + 1]);
    }
    return s;
}

StateIdentification identify_states_1d(const TimeSeries& series, const PipelineOptions& options,
                                       const Geometry& geometry) {
    DetectOptions detect{options.window, options.quantile, geometry, options.inflection, options.unnormalized};
    auto detection = detect_change_points(series, detect);
    auto segmentation = segment(series, detection.change_points);

    const auto values = series.values();
    std::vector<SegmentMeasure> measures;
    std::vector<double> lengths;
    measures.reserve(segmentation.segments.size());
    for (const auto& [start, end] : segmentation.segments) {
        const auto slice = values.subspan(start, end - start);
        if (geometry.is_circular()) {
            measures.emplace_back(CircularMeasure::wrap(slice, geometry.period));
        } else {
            measures.emplace_back(EmpiricalMeasure1D{std::vector<double>(slice.begin(), slice.end())});
        }
        lengths.push_back(static_cast<double>(end - start));
    }

    StateIdentification out;
    out.distances = pairwise_segment_distances(measures, &out.distance_evaluations);
    out.similarity = similarity(out.distances, options.sigma);
    out.clusters = density_peaks_cluster(out.distances, options.density, lengths);

    out.point_labels.assign(series.size(), -1);
    for (std::size_t s = 0; s < segmentation.segments.size(); ++s) {
        const auto [start, end] = segmentation.segments[s];
        for (std::size_t t = start; t < end; ++t) {
            out.point_labels[t] = out.clusters.labels[s];
        }
    }
    out.detection = std::move(detection);
    out.segmentation = std::move(segmentation);
    return out;
}

MultiSeries::MultiSeries(std::vector<std::vector<double>> channels, std::vector<Geometry> geometry)
    : channels_{std::move(channels)}, geometry_{std::move(geometry)} {
    if (channels_.empty()) {
        throw InvalidInput("multi-channel series needs at least one channel");
    }
    if (geometry_.size() != channels_.size()) {
        throw InvalidInput("one geometry per channel required");
    }
    for (const auto& c : channels_) {
        if (c.size() != channels_.front().size()) {
            throw InvalidInput("all channels must have the same length");
        }
    }
}

std::vector<int> LabeledTrajectory::tuple(std::size_t t) const {
    std::vector<int> out;
    out.reserve(channel_labels.size());
    for (const auto& c : channel_labels) {
        out.push_back(c[t]);
    }
    return out;
}

std::string LabeledTrajectory::composite(std::size_t t) const {
    std::string out;
    for (std::size_t d = 0; d < channel_labels.size(); ++d) {
        if (d > 0) {
            out += '-';
        }
        out += std::to_string(channel_labels[d][t]);
    }
    return out;
}

namespace {

[[noreturn]] void rethrow_for_channel(std::size_t d) {
    const std::string prefix = "channel " + std::to_string(d) + ": ";
    try {
        throw;
    } catch (const InvalidParameter& e) {
        throw InvalidParameter(prefix + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput(prefix + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(prefix + e.what());
    }
}

} // namespace

MultiStateIdentification identify_states_multi(const MultiSeries& series, const PipelineOptions& options,
                                               std::span<const ChannelOverride> overrides) {
    const std::size_t dim = series.dimension();
    if (!overrides.empty() && overrides.size() != dim) {
        throw InvalidInput("channel overrides must be given for every channel or none");
    }
    MultiStateIdentification out;
    out.channels.resize(dim);
    detail::parallel_for(dim, [&](std::size_t d) {
        try {
            PipelineOptions o = options;
            if (!overrides.empty()) {
                o.window = overrides[d].window.value_or(o.window);
                o.quantile = overrides[d].quantile.value_or(o.quantile);
            }
            out.channels[d] = identify_states_1d(TimeSeries{series.channel(d)}, o, series.geometry(d));
        } catch (...) {
            rethrow_for_channel(d);
        }
    });
    for (const auto& c : out.channels) {
        out.labels.channel_labels.push_back(c.point_labels);
    }
    return out;
}

} // namespace wcpd
