#pragma once

// Change point detection in the frequency domain: each STFT column is a
// probability distribution over frequency, and contiguous columns are
// compared with the 1-D W2 distance.

#include "wcpd/cpd.hpp"
#include "wcpd/transport.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace wcpd {

/// Symmetric tapered-cosine window of length n; alpha = 0 is rectangular,
/// alpha = 1 is Hann.
std::vector<double> tukey_window(std::size_t n, double alpha);

struct SpectrogramParams {
    double sample_rate = 11718.0;
    std::size_t nperseg = 512;
    std::size_t noverlap = 64;
    double alpha = 0.25;

    std::size_t hop() const noexcept { return nperseg - noverlap; }
};

struct Spectrogram {
    SpectrogramParams params;
    /// Bin center frequencies in Hz (one-sided, nperseg/2 + 1 bins).
    std::vector<double> frequencies;
    /// Normalised power per column.
    std::vector<WeightedMeasure1D> columns;
    /// Power of each column before normalisation.
    std::vector<double> column_power;
    /// Columns without power, replaced by uniform weights.
    std::vector<bool> zero_power;
    std::size_t n_samples = 0;

    std::size_t frame_start(std::size_t frame) const noexcept { return frame * params.hop(); }
    double frame_time(std::size_t frame) const noexcept {
        return static_cast<double>(frame_start(frame)) / params.sample_rate;
    }
};

/// Number of columns for n samples: floor((n - nperseg) / hop) + 1.
std::size_t spectrogram_column_count(std::size_t n_samples, std::size_t nperseg, std::size_t noverlap);

Spectrogram compute_spectrogram(std::span<const double> samples, const SpectrogramParams& params = {});

struct SpectralChangePoints {
    MetricDerivativeSeries speeds;
    ThresholdResult threshold;
    /// In frame indices, boundaries 0 and n_columns included.
    ChangePointSet frames;
    /// Interior change points as sample indices (frame start times).
    std::vector<std::size_t> sample_indices;
};

/// speeds[k] = W2(column k, column k+1), reported at frame k+1; threshold and
/// run extraction are those of the time-domain detector.
SpectralChangePoints column_change_points(const Spectrogram& spec, double q,
                                          InflectionMode mode = InflectionMode::value);

} // namespace wcpd
