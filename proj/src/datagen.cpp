#include "wcpd/datagen.hpp"

#include "wcpd/errors.hpp"
#include "wcpd/random.hpp"
#include "wcpd/transport.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace wcpd {

double laplace_scale_from_variance(double variance) {
    if (!(variance > 0.0)) {
        throw InvalidParameter("Laplace variance must be positive");
    }
    return std::sqrt(variance / 2.0);
}

GeneratedSeries gen_toy_laplace(const ToyConfig& cfg) {
    const double b1 = cfg.b;
    const double b2 = cfg.b2.value_or(cfg.b);
    if (!(b1 > 0.0) || !(b2 > 0.0)) {
        throw InvalidParameter("toy: Laplace scales must be positive");
    }
    if (cfg.segment_length < 1 || cfg.n_cycles < 1) {
        throw InvalidParameter("toy: segment_length and n_cycles must be at least 1");
    }

    Rng rng{cfg.seed};
    std::vector<double> x;
    std::vector<std::size_t> boundaries;
    const std::size_t L = cfg.transition_length;

    auto stationary = [&](double m, double b) {
        if (!x.empty()) {
            boundaries.push_back(x.size());
        }
        for (std::size_t i = 0; i < cfg.segment_length; ++i) {
            x.push_back(rng.laplace(m, b));
        }
    };
    // Walks the displacement interpolant from (m_from, b_from) to (m_to, b_to).
    auto transition = [&](double m_from, double b_from, double m_to, double b_to) {
        if (L == 0) {
            return;
        }
        boundaries.push_back(x.size());
        for (std::size_t i = 0; i < L; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(L);
            x.push_back(rng.laplace((1.0 - s) * m_from + s * m_to, (1.0 - s) * b_from + s * b_to));
        }
    };

    for (std::size_t c = 0; c < cfg.n_cycles; ++c) {
        if (c > 0 && cfg.return_transitions) {
            transition(cfg.m2, b2, cfg.m1, b1);
        }
        stationary(cfg.m1, b1);
        transition(cfg.m1, b1, cfg.m2, b2);
        stationary(cfg.m2, b2);
    }
    const std::size_t n = x.size();
    return {TimeSeries{std::move(x)}, ChangePointSet{std::move(boundaries), n}};
}

PotentialValue prinz_potential(double x) {
    const double x2 = x * x;
    const double x7 = x2 * x2 * x2 * x;
    const double g0 = 0.8 * std::exp(-80.0 * x2);
    const double g1 = 0.2 * std::exp(-80.0 * (x - 0.5) * (x - 0.5));
    const double g2 = 0.5 * std::exp(-40.0 * (x + 0.5) * (x + 0.5));
    const double value = 4.0 * (x7 * x + g0 + g1 + g2);
    const double derivative =
        4.0 * (8.0 * x7 - 160.0 * x * g0 - 160.0 * (x - 0.5) * g1 - 80.0 * (x + 0.5) * g2);
    return {value, derivative};
}

PotentialValue double_well_potential(double x, double barrier) {
    const double u = x * x - 1.0;
    return {barrier * u * u, 4.0 * barrier * x * u};
}

namespace {

void validate(const SdeConfig& cfg) {
    if (!(cfg.h > 0.0) || !(cfg.kT > 0.0) || !(cfg.mass > 0.0) || !(cfg.damping > 0.0)) {
        throw InvalidParameter("SDE: h, kT, mass and damping must all be positive");
    }
    if (cfg.n_samples < 1 || cfg.substeps < 1) {
        throw InvalidParameter("SDE: n_samples and substeps must be at least 1");
    }
}

template <typename Gradient>
TimeSeries euler_maruyama(const SdeConfig& cfg, Gradient&& grad) {
    validate(cfg);
    Rng rng{cfg.seed};
    const double friction = cfg.mass * cfg.damping;
    const double drift = cfg.h / friction;
    const double noise = std::sqrt(2.0 * cfg.h * cfg.kT / friction);

    std::vector<double> out;
    out.reserve(cfg.n_samples);
    double x = cfg.x0;
    out.push_back(x);
    for (std::size_t t = 1; t < cfg.n_samples; ++t) {
        for (std::size_t s = 0; s < cfg.substeps; ++s) {
            x = x - drift * grad(x) + noise * rng.normal();
            if (!(std::abs(x) <= 10.0)) {
                throw SimulationDiverged("trajectory left |x| <= 10 at sample " + std::to_string(t) +
                                         "; reduce the step h (currently " + std::to_string(cfg.h) + ")");
            }
        }
        out.push_back(x);
    }
    return TimeSeries{std::move(out)};
}

} // namespace

TimeSeries gen_prinz(const SdeConfig& cfg) {
    return euler_maruyama(cfg, [](double x) { return prinz_potential(x).derivative; });
}

TimeSeries gen_double_well(const SdeConfig& cfg, double barrier) {
    if (!(barrier > 0.0)) {
        throw InvalidParameter("double well barrier must be positive");
    }
    return euler_maruyama(cfg, [barrier](double x) { return double_well_potential(x, barrier).derivative; });
}

SdeConfig prinz_preset(std::uint64_t seed) {
    SdeConfig cfg;
    cfg.h = 1e-5;
    cfg.substeps = 500;
    cfg.n_samples = 20000;
    cfg.seed = seed;
    return cfg;
}

SdeConfig double_well_preset(std::uint64_t seed) {
    SdeConfig cfg;
    cfg.h = 1e-3;
    cfg.substeps = 1;
    cfg.n_samples = 150000;
    cfg.x0 = -1.0;
    cfg.seed = seed;
    return cfg;
}

GeneratedMultiSeries gen_torus_blocks(const TorusConfig& cfg) {
    if (cfg.means.empty() || cfg.block_lengths.empty()) {
        throw InvalidParameter("torus: need at least one channel and one block");
    }
    if (!(cfg.kappa > 0.0) || !(cfg.period > 0.0)) {
        throw InvalidParameter("torus: kappa and period must be positive");
    }
    for (const auto& m : cfg.means) {
        if (m.size() != cfg.block_lengths.size()) {
            throw InvalidParameter("torus: every channel needs one mean per block");
        }
    }
    for (std::size_t len : cfg.block_lengths) {
        if (len < 1) {
            throw InvalidParameter("torus: block lengths must be at least 1");
        }
    }

    const Rng root{cfg.seed};
    const double spread = cfg.period / (2.0 * std::numbers::pi) / std::sqrt(cfg.kappa);
    std::vector<std::vector<double>> channels;
    std::vector<ChangePointSet> truth;
    std::size_t total = 0;
    for (std::size_t len : cfg.block_lengths) {
        total += len;
    }
    for (std::size_t d = 0; d < cfg.means.size(); ++d) {
        Rng rng = root.split(d);
        std::vector<double> x;
        x.reserve(total);
        std::vector<std::size_t> cps;
        for (std::size_t b = 0; b < cfg.block_lengths.size(); ++b) {
            if (b > 0 && cfg.means[d][b] != cfg.means[d][b - 1]) {
                cps.push_back(x.size());
            }
            for (std::size_t i = 0; i < cfg.block_lengths[b]; ++i) {
                x.push_back(wrap_angle(rng.normal(cfg.means[d][b], spread), cfg.period));
            }
        }
        channels.push_back(std::move(x));
        truth.emplace_back(std::move(cps), total);
    }
    std::vector<Geometry> geometry(channels.size(), Geometry::circular(cfg.period));
    return {MultiSeries{std::move(channels), std::move(geometry)}, std::move(truth)};
}

} // namespace wcpd
