#pragma once

// Seeded synthetic trajectories with known change points.

#include "wcpd/cpd.hpp"
#include "wcpd/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace wcpd {

/// Alternating Laplace blocks joined by displacement-interpolated transitions.
struct ToyConfig {
    double m1 = 100.0;
    double m2 = 200.0;
    /// Laplace scale of the first state (variance 2 b^2).
    double b = 3.1622776601683795;
    /// Scale of the second state; defaults to `b`. Interpolated linearly too.
    std::optional<double> b2;
    std::size_t segment_length = 480;
    std::size_t transition_length = 20;
    std::size_t n_cycles = 10;
    /// Also interpolate back from m2 to m1 between cycles. When false the
    /// return to m1 is abrupt.
    bool return_transitions = true;
    std::uint64_t seed = 0;
};

/// Laplace scale whose variance equals `variance`.
double laplace_scale_from_variance(double variance);

struct GeneratedSeries {
    TimeSeries series;
    ChangePointSet truth;
};

/// Blocks per cycle: m1 (segment_length), m1->m2 transition (L), m2
/// (segment_length), then an m2->m1 transition (L) before the next cycle.
/// Transition draw i uses location (1 - s) m1 + s m2 with s = i / L. The
/// truth holds every block boundary; zero-length blocks are dropped.
GeneratedSeries gen_toy_laplace(const ToyConfig& cfg);

struct PotentialValue {
    double value;
    double derivative;
};

/// V(x) = 4 (x^8 + 0.8 e^{-80 x^2} + 0.2 e^{-80 (x-0.5)^2} + 0.5 e^{-40 (x+0.5)^2}).
PotentialValue prinz_potential(double x);

/// V(x) = barrier (x^2 - 1)^2.
PotentialValue double_well_potential(double x, double barrier);

/// Overdamped Langevin dynamics integrated by Euler-Maruyama:
/// x <- x - h V'(x) / (m d) + sqrt(2 h kT / (m d)) eta.
struct SdeConfig {
    double h = 1e-5;
    double kT = 1.0;
    double mass = 1.0;
    double damping = 1.0;
    std::size_t n_samples = 10000;
    /// Integration steps between recorded samples.
    std::size_t substeps = 1;
    double x0 = 0.0;
    std::uint64_t seed = 0;
};

/// Throws SimulationDiverged once |x| exceeds 10.
TimeSeries gen_prinz(const SdeConfig& cfg);
TimeSeries gen_double_well(const SdeConfig& cfg, double barrier);

/// Prinz defaults: step 1e-5, 500 steps per sample, 20000 samples.
SdeConfig prinz_preset(std::uint64_t seed = 0);

/// Double-well defaults for barrier 1 kT: step 1e-3, 150000 samples from x0 = -1.
SdeConfig double_well_preset(std::uint64_t seed = 0);
inline constexpr double kDefaultDoubleWellBarrier = 1.0;

struct TorusConfig {
    /// means[d][b]: mean angle of channel d in block b.
    std::vector<std::vector<double>> means;
    std::vector<std::size_t> block_lengths;
    /// Concentration; wrapped-normal spread is (period / 2 pi) / sqrt(kappa).
    double kappa = 50.0;
    double period = 360.0;
    std::uint64_t seed = 0;
};

struct GeneratedMultiSeries {
    MultiSeries series;
    /// Per channel: boundaries where that channel's block mean changes.
    std::vector<ChangePointSet> truth;
};

GeneratedMultiSeries gen_torus_blocks(const TorusConfig& cfg);

} // namespace wcpd
