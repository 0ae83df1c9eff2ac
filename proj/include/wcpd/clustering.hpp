#pragma once

#include "wcpd/transport.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace wcpd {

/// Symmetric N x N matrix of pairwise W2 distances with a zero diagonal.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n) : n_{n}, data_(n * n, 0.0) {}

    /// Validates symmetry (1e-12), zero diagonal and nonnegativity.
    static DistanceMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double d);
    DistanceMatrix scaled(double c) const;

private:
    std::size_t n_;
    std::vector<double> data_;
};

/// Gaussian kernel of squared W2 distances: exp(-d^2 / (2 sigma)).
class SimilarityMatrix {
public:
    SimilarityMatrix(std::size_t n, double bandwidth) : n_{n}, bandwidth_{bandwidth}, data_(n * n, 1.0) {}

    std::size_t size() const noexcept { return n_; }
    double bandwidth() const noexcept { return bandwidth_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    double& at(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

private:
    std::size_t n_;
    double bandwidth_;
    std::vector<double> data_;
};

using SegmentMeasure = std::variant<EmpiricalMeasure1D, CircularMeasure>;

/// Pairwise W2 between segment measures (quantile route on the line, circular
/// transport on the circle). Exactly N(N-1)/2 transport evaluations are made;
/// the count is written to `evaluations` when given. Throws InvalidInput on
/// mixed geometries or mismatched periods.
DistanceMatrix pairwise_segment_distances(std::span<const SegmentMeasure> segments,
                                          std::size_t* evaluations = nullptr);

SimilarityMatrix similarity(const DistanceMatrix& distances, double sigma = 1.0);

struct DensityPeaksOptions {
    /// Quantile of the off-diagonal distances used as cutoff d_c.
    double dc_percentile = 0.1;
    /// Centers are the points whose log(gamma) is this many standard
    /// deviations above the mean.
    double center_zscore = 2.5;
};

struct ClusterResult {
    /// Cluster id per item; ids ordered by decreasing population. -1 is
    /// reserved for unassigned items and is not produced by density peaks.
    std::vector<int> labels;
    /// Item index of each cluster center, indexed by cluster id.
    std::vector<std::size_t> centers;
    std::vector<double> rho;
    std::vector<double> delta;
    std::vector<double> gamma;
    /// Nearest item of higher density (self for the global density maximum).
    std::vector<std::size_t> parent;
    double dc = 0.0;

    std::size_t cluster_count() const noexcept { return centers.size(); }
};

/// Density peaks clustering with automatic center selection.
///
/// rho_i = sum_{j != i} exp(-(d_ij / d_c)^2), delta_i = distance to the
/// nearest denser item, gamma = rho * delta. Centers are log-gamma outliers
/// (plus the density maximum, which has no denser item); the rest inherit
/// labels down the nearest-denser chain. `population`, when given, weights
/// items (e.g. segment lengths) for ordering cluster ids.
ClusterResult density_peaks_cluster(const DistanceMatrix& distances,
                                    const DensityPeaksOptions& options = {},
                                    std::span<const double> population = {});

/// Lloyd's k-means on scalars with k-means++ seeding; baseline for comparisons.
std::vector<int> kmeans_baseline(std::span<const double> points, std::size_t k, std::uint64_t seed);

} // namespace wcpd
