#include "wcpd/clustering.hpp"

#include "wcpd/cpd.hpp"
#include "wcpd/errors.hpp"
#include "wcpd/parallel.hpp"
#include "wcpd/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wcpd {

DistanceMatrix DistanceMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    DistanceMatrix m{n};
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw InvalidInput("distance matrix must be square");
        }
        if (rows[i][i] != 0.0) {
            throw InvalidInput("distance matrix diagonal must be zero");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double d = rows[i][j];
            if (!(d >= 0.0) || !std::isfinite(d)) {
                throw InvalidInput("distance matrix entries must be finite and nonnegative");
            }
            if (std::abs(d - rows[j][i]) > 1e-12 * std::max(1.0, d)) {
                throw InvalidInput("distance matrix is not symmetric at (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");
            }
            m.data_[i * n + j] = d;
        }
    }
    return m;
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double d) {
    data_[i * n_ + j] = d;
    data_[j * n_ + i] = d;
}

DistanceMatrix DistanceMatrix::scaled(double c) const {
    DistanceMatrix out{*this};
    for (double& d : out.data_) {
        d *= c;
    }
    return out;
}

DistanceMatrix pairwise_segment_distances(std::span<const SegmentMeasure> segments,
                                          std::size_t* evaluations) {
    const std::size_t n = segments.size();
    if (n == 0) {
        throw InvalidInput("pairwise_segment_distances: no segments");
    }
    const bool circular = std::holds_alternative<CircularMeasure>(segments[0]);
    for (const auto& s : segments) {
        if (std::holds_alternative<CircularMeasure>(s) != circular) {
            throw InvalidInput("pairwise_segment_distances: mixed linear and circular segments");
        }
        if (circular && std::get<CircularMeasure>(s).period() !=
                            std::get<CircularMeasure>(segments[0]).period()) {
            throw InvalidInput("pairwise_segment_distances: circular segments differ in period");
        }
    }

    DistanceMatrix out{n};
    std::atomic<std::size_t> count{0};
    detail::parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sq = 0.0;
            if (circular) {
                sq = w2_squared_circular_quantile(std::get<CircularMeasure>(segments[i]),
                                                  std::get<CircularMeasure>(segments[j]));
            } else {
                sq = w2_squared_quantile(std::get<EmpiricalMeasure1D>(segments[i]),
                                         std::get<EmpiricalMeasure1D>(segments[j]));
            }
            out.set(i, j, std::sqrt(std::max(sq, 0.0)));
            count.fetch_add(1, std::memory_order_relaxed);
        }
    });
    if (evaluations != nullptr) {
        *evaluations = count.load();
    }
    return out;
}

SimilarityMatrix similarity(const DistanceMatrix& distances, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidParameter("similarity bandwidth sigma must be positive; got " + std::to_string(sigma));
    }
    const std::size_t n = distances.size();
    SimilarityMatrix out{n, sigma};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = distances(i, j);
            out.at(i, j) = i == j ? 1.0 : std::exp(-d * d / (2.0 * sigma));
        }
    }
    return out;
}

ClusterResult density_peaks_cluster(const DistanceMatrix& distances, const DensityPeaksOptions& options,
                                    std::span<const double> population) {
    const std::size_t n = distances.size();
    if (n == 0) {
        throw InvalidInput("density_peaks_cluster: empty distance matrix");
    }
    if (!(options.dc_percentile > 0.0 && options.dc_percentile < 1.0)) {
        throw InvalidParameter("dc_percentile must lie in (0, 1)");
    }
    if (!population.empty() && population.size() != n) {
        throw InvalidInput("density_peaks_cluster: population weights do not match matrix size");
    }

    ClusterResult r;
    r.rho.assign(n, 0.0);
    r.delta.assign(n, 0.0);
    r.gamma.assign(n, 0.0);
    r.parent.assign(n, 0);
    r.labels.assign(n, -1);

    if (n == 1) {
        r.labels[0] = 0;
        r.centers = {0};
        return r;
    }

    std::vector<double> off;
    off.reserve(n * (n - 1) / 2);
    double smallest_positive = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            off.push_back(distances(i, j));
            if (distances(i, j) > 0.0) {
                smallest_positive = std::min(smallest_positive, distances(i, j));
            }
        }
    }
    double dc = empirical_quantile(off, options.dc_percentile);
    if (dc <= 0.0) {
        dc = std::isfinite(smallest_positive) ? smallest_positive : 1.0;
    }
    r.dc = dc;

    for (std::size_t i = 0; i < n; ++i) {
        double rho = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                const double u = distances(i, j) / dc;
                rho += std::exp(-u * u);
            }
        }
        r.rho[i] = rho;
    }

    // Density ranking; equal densities rank the lower index as denser.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r.rho[a] > r.rho[b]; });

    const std::size_t top = order[0];
    r.parent[top] = top;
    double max_row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        max_row = std::max(max_row, distances(top, j));
    }
    r.delta[top] = max_row;
    for (std::size_t rank = 1; rank < n; ++rank) {
        const std::size_t i = order[rank];
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = order[0];
        for (std::size_t prev = 0; prev < rank; ++prev) {
            const double d = distances(i, order[prev]);
            if (d < best) {
                best = d;
                arg = order[prev];
            }
        }
        r.delta[i] = best;
        r.parent[i] = arg;
    }

    constexpr double eps = 1e-12;
    std::vector<double> log_gamma(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.gamma[i] = r.rho[i] * r.delta[i];
        log_gamma[i] = std::log(r.gamma[i] + eps);
    }
    const double mean = std::accumulate(log_gamma.begin(), log_gamma.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : log_gamma) {
        var += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    const double cut = mean + options.center_zscore * sd;

    std::vector<bool> is_center(n, false);
    // The density maximum has no denser item, so it always roots a cluster.
    is_center[top] = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (sd > 0.0 && log_gamma[i] > cut) {
            is_center[i] = true;
        }
    }

    std::vector<int> provisional(n, -1);
    std::vector<std::size_t> provisional_centers;
    for (std::size_t i : order) {
        if (is_center[i]) {
            provisional[i] = static_cast<int>(provisional_centers.size());
            provisional_centers.push_back(i);
        } else {
            provisional[i] = provisional[r.parent[i]];
        }
    }

    const std::size_t k = provisional_centers.size();
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        mass[static_cast<std::size_t>(provisional[i])] += population.empty() ? 1.0 : population[i];
    }
    std::vector<std::size_t> by_mass(k);
    std::iota(by_mass.begin(), by_mass.end(), 0);
    std::stable_sort(by_mass.begin(), by_mass.end(),
                     [&](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
    std::vector<int> final_id(k);
    r.centers.resize(k);
    for (std::size_t rank = 0; rank < k; ++rank) {
        final_id[by_mass[rank]] = static_cast<int>(rank);
        r.centers[rank] = provisional_centers[by_mass[rank]];
    }
    for (std::size_t i = 0; i < n; ++i) {
        r.labels[i] = final_id[static_cast<std::size_t>(provisional[i])];
    }
    return r;
}

std::vector<int> kmeans_baseline(std::span<const double> points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.size();
    if (k < 1) {
        throw InvalidParameter("kmeans: k must be at least 1");
    }
    std::vector<double> distinct(points.begin(), points.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (k > distinct.size()) {
        throw InvalidParameter("kmeans: k=" + std::to_string(k) + " exceeds the number of distinct points (" +
                               std::to_string(distinct.size()) + ")");
    }

    Rng rng{seed};
    std::vector<double> centers;
    centers.push_back(points[rng.below(n)]);
    std::vector<double> d2(n);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) {
                best = std::min(best, (points[i] - c) * (points[i] - c));
            }
            d2[i] = best;
            total += best;
        }
        double target = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) {
                continue;
            }
            if (target < d2[i]) {
                pick = i;
                break;
            }
            target -= d2[i];
        }
        while (d2[pick] <= 0.0) {
            --pick;
        }
        centers.push_back(points[pick]);
    }

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < 1000; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            for (std::size_t c = 1; c < k; ++c) {
                if (std::abs(points[i] - centers[c]) < std::abs(points[i] - centers[static_cast<std::size_t>(best)])) {
                    best = static_cast<int>(c);
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[static_cast<std::size_t>(labels[i])] += points[i];
            ++count[static_cast<std::size_t>(labels[i])];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) {
                centers[c] = sum[c] / static_cast<double>(count[c]);
            }
        }
    }

    // Relabel by ascending center so ids read left to right on the line.
    std::vector<std::size_t> rank(k);
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
    std::vector<int> relabel(k);
    for (std::size_t r = 0; r < k; ++r) {
        relabel[rank[r]] = static_cast<int>(r);
    }
    for (int& l : labels) {
        l = relabel[static_cast<std::size_t>(l)];
    }
    return labels;
}

} // namespace wcpd
