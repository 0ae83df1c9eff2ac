#include "wcpd/spectro.hpp"

#include "wcpd/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

namespace wcpd {

std::vector<double> tukey_window(std::size_t n, double alpha) {
    if (n < 2) {
        throw InvalidParameter("tukey window needs n >= 2");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidParameter("tukey shape alpha must lie in [0, 1]");
    }
    std::vector<double> w(n, 1.0);
    if (alpha == 0.0) {
        return w;
    }
    const double span = alpha * static_cast<double>(n - 1);
    const auto width = static_cast<std::size_t>(std::floor(span / 2.0));
    for (std::size_t i = 0; i <= width && i < n; ++i) {
        const double v = 0.5 * (1.0 + std::cos(std::numbers::pi * (-1.0 + 2.0 * static_cast<double>(i) / span)));
        w[i] = v;
        w[n - 1 - i] = v;
    }
    return w;
}

std::size_t spectrogram_column_count(std::size_t n_samples, std::size_t nperseg, std::size_t noverlap) {
    if (noverlap >= nperseg) {
        throw InvalidParameter("noverlap must be smaller than nperseg");
    }
    if (n_samples < nperseg) {
        return 0;
    }
    return (n_samples - nperseg) / (nperseg - noverlap) + 1;
}

namespace {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

} // namespace

Spectrogram compute_spectrogram(std::span<const double> samples, const SpectrogramParams& params) {
    if (params.nperseg < 2) {
        throw InvalidParameter("nperseg must be at least 2");
    }
    if (!(params.sample_rate > 0.0)) {
        throw InvalidParameter("sample rate must be positive");
    }
    const std::size_t columns = spectrogram_column_count(samples.size(), params.nperseg, params.noverlap);
    if (samples.size() < params.nperseg) {
        throw InvalidInput("signal of " + std::to_string(samples.size()) + " samples is shorter than nperseg=" +
                           std::to_string(params.nperseg));
    }

    const std::size_t n = params.nperseg;
    const std::size_t bins = n / 2 + 1;
    const auto window = tukey_window(n, params.alpha);

    std::unique_ptr<double, FftwFree> in{static_cast<double*>(fftw_malloc(sizeof(double) * n))};
    std::unique_ptr<fftw_complex, FftwFree> out{
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins))};
    std::unique_ptr<fftw_plan_s, PlanDestroy> plan{
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE)};

    Spectrogram spec;
    spec.params = params;
    spec.n_samples = samples.size();
    spec.frequencies.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        spec.frequencies[k] = static_cast<double>(k) * params.sample_rate / static_cast<double>(n);
    }
    spec.columns.reserve(columns);

    std::vector<double> power(bins);
    for (std::size_t c = 0; c < columns; ++c) {
        const std::size_t start = c * params.hop();
        for (std::size_t i = 0; i < n; ++i) {
            in.get()[i] = samples[start + i] * window[i];
        }
        fftw_execute(plan.get());
        double total = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double re = out.get()[k][0];
            const double im = out.get()[k][1];
            power[k] = re * re + im * im;
            total += power[k];
        }
        std::vector<double> weights(bins);
        const bool silent = !(total > 0.0);
        for (std::size_t k = 0; k < bins; ++k) {
            weights[k] = silent ? 1.0 / static_cast<double>(bins) : power[k] / total;
        }
        spec.columns.emplace_back(spec.frequencies, std::move(weights));
        spec.column_power.push_back(total);
        spec.zero_power.push_back(silent);
    }
    return spec;
}

SpectralChangePoints column_change_points(const Spectrogram& spec, double q, InflectionMode mode) {
    const std::size_t columns = spec.columns.size();
    if (columns < 2) {
        throw InvalidInput("need at least two spectrogram columns");
    }
    MetricDerivativeSeries speeds;
    speeds.window = 1;
    speeds.offset = 1;
    speeds.series_length = columns;
    speeds.speeds.resize(columns - 1);
    for (std::size_t k = 0; k + 1 < columns; ++k) {
        speeds.speeds[k] = std::sqrt(std::max(0.0, w2_squared_quantile(spec.columns[k], spec.columns[k + 1])));
    }
    auto threshold = quantile_threshold(speeds, q);
    auto frames = extract_inflection_points(speeds, threshold.candidates, mode);

    std::vector<std::size_t> samples;
    for (std::size_t f : frames.interior()) {
        samples.push_back(spec.frame_start(f));
    }
    return {std::move(speeds), std::move(threshold), std::move(frames), std::move(samples)};
}

} // namespace wcpd
