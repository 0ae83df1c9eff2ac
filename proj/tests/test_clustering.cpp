#include "doctest.h"
#include "oracles.hpp"

#include "wcpd/clustering.hpp"
#include "wcpd/errors.hpp"
#include "wcpd/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace wcpd;

namespace {

struct Blobs {
    DistanceMatrix dm{0};
    std::vector<int> truth;
};

// Points on a line: blob b at 10 * (b + 1) plus jitter below 0.05.
Blobs three_blobs(std::uint64_t seed, std::size_t per_blob = 20) {
    Rng rng{seed};
    std::vector<double> x;
    Blobs b;
    for (int blob = 0; blob < 3; ++blob) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            x.push_back(10.0 * (blob + 1) + 0.05 * rng.uniform());
            b.truth.push_back(blob);
        }
    }
    b.dm = DistanceMatrix{x.size()};
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            b.dm.set(i, j, std::abs(x[i] - x[j]));
        }
    }
    return b;
}

DistanceMatrix permuted(const DistanceMatrix& dm, const std::vector<std::size_t>& p) {
    DistanceMatrix out{dm.size()};
    for (std::size_t i = 0; i < dm.size(); ++i) {
        for (std::size_t j = i + 1; j < dm.size(); ++j) {
            out.set(i, j, dm(p[i], p[j]));
        }
    }
    return out;
}

} // namespace

TEST_CASE("distance matrix validation") {
    CHECK_THROWS_AS(DistanceMatrix::from_rows({{0, 1}, {2, 0}}), InvalidInput);
    CHECK_THROWS_AS(DistanceMatrix::from_rows({{1, 1}, {1, 0}}), InvalidInput);
    CHECK_THROWS_AS(DistanceMatrix::from_rows({{0, -1}, {-1, 0}}), InvalidInput);
    const auto ok = DistanceMatrix::from_rows({{0, 2}, {2, 0}});
    CHECK(ok(0, 1) == 2.0);
    CHECK(ok.scaled(3.0)(1, 0) == 6.0);
}

TEST_CASE("pairwise segment distances") {
    const std::vector<SegmentMeasure> one{EmpiricalMeasure1D{{1.0, 2.0}}};
    CHECK(pairwise_segment_distances(one).size() == 1);
    CHECK(pairwise_segment_distances(one)(0, 0) == 0.0);

    const std::vector<SegmentMeasure> segs{EmpiricalMeasure1D{{0.0}}, EmpiricalMeasure1D{{10.0, 10.0}},
                                           EmpiricalMeasure1D{{20.0, 20.0, 20.0}}, EmpiricalMeasure1D{{0.0}}};
    std::size_t evals = 0;
    const auto dm = pairwise_segment_distances(segs, &evals);
    CHECK(evals == 6);
    CHECK(dm(0, 1) == doctest::Approx(10.0));
    CHECK(dm(0, 2) == doctest::Approx(20.0));
    CHECK(dm(1, 2) == doctest::Approx(10.0));
    CHECK(dm(0, 3) == 0.0);
    CHECK(dm(0, 1) < dm(0, 2));

    const std::vector<SegmentMeasure> mixed{EmpiricalMeasure1D{{0.0}}, CircularMeasure{{0.0}, 360.0}};
    CHECK_THROWS_AS(pairwise_segment_distances(mixed), InvalidInput);
    const std::vector<SegmentMeasure> periods{CircularMeasure{{0.0}, 360.0}, CircularMeasure{{0.0}, 1.0}};
    CHECK_THROWS_AS(pairwise_segment_distances(periods), InvalidInput);
    CHECK_THROWS_AS(pairwise_segment_distances(std::vector<SegmentMeasure>{}), InvalidInput);

    const std::vector<SegmentMeasure> circ{CircularMeasure{{350.0}, 360.0}, CircularMeasure{{10.0, 10.0}, 360.0}};
    CHECK(pairwise_segment_distances(circ)(0, 1) == doctest::Approx(20.0));
}

TEST_CASE("similarity kernel") {
    auto dm = DistanceMatrix::from_rows({{0, std::sqrt(2.0), 3}, {std::sqrt(2.0), 0, 1}, {3, 1, 0}});
    const auto s = similarity(dm, 1.0);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(s(0, 1) == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK(s(0, 2) < s(0, 1));
    CHECK(s(1, 2) > s(0, 1));
    CHECK(s(2, 0) == s(0, 2));
    CHECK_THROWS_AS(similarity(dm, 0.0), InvalidParameter);
}

TEST_CASE("density peaks trivial cases") {
    const auto one = density_peaks_cluster(DistanceMatrix{1});
    CHECK(one.labels == std::vector<int>{0});
    CHECK(one.cluster_count() == 1);
    CHECK_THROWS_AS(density_peaks_cluster(DistanceMatrix{0}), InvalidInput);

    DistanceMatrix simplex{12};
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = i + 1; j < 12; ++j) {
            simplex.set(i, j, 1.0);
        }
    }
    const auto r = density_peaks_cluster(simplex);
    CHECK(r.cluster_count() == 1);
    CHECK(std::all_of(r.labels.begin(), r.labels.end(), [](int l) { return l == 0; }));
}

TEST_CASE("three separated blobs are recovered exactly") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto b = three_blobs(seed);
        const auto r = density_peaks_cluster(b.dm);
        CHECK(r.cluster_count() == 3);
        CHECK(oracle::adjusted_rand_index(r.labels, b.truth) == doctest::Approx(1.0));
        for (std::size_t k = 0; k < r.cluster_count(); ++k) {
            CHECK(r.labels[r.centers[k]] == static_cast<int>(k));
        }
    }
}

TEST_CASE("density peaks structural invariants") {
    Rng rng{5};
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.below(40);
        std::vector<double> x(n);
        for (double& v : x) {
            v = rng.normal(0.0, 1.0) + (rng.uniform() < 0.5 ? 6.0 : 0.0);
        }
        DistanceMatrix dm{n};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                dm.set(i, j, std::abs(x[i] - x[j]));
            }
        }
        const auto r = density_peaks_cluster(dm);
        REQUIRE(r.labels.size() == n);
        CHECK(r.cluster_count() >= 1);
        std::vector<std::size_t> population(r.cluster_count(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(r.labels[i] >= 0);
            REQUIRE(static_cast<std::size_t>(r.labels[i]) < r.cluster_count());
            ++population[static_cast<std::size_t>(r.labels[i])];
            CHECK(r.gamma[i] == doctest::Approx(r.rho[i] * r.delta[i]));
            std::size_t cur = i;
            for (std::size_t steps = 0; steps <= n && r.parent[cur] != cur; ++steps) {
                const bool is_center = std::find(r.centers.begin(), r.centers.end(), cur) != r.centers.end();
                if (is_center) {
                    break;
                }
                CHECK(r.labels[r.parent[cur]] == r.labels[cur]);
                cur = r.parent[cur];
            }
        }
        for (std::size_t k = 1; k < population.size(); ++k) {
            CHECK(population[k - 1] >= population[k]);
        }
    }
}

TEST_CASE("partition is invariant to permutations and uniform scaling") {
    Rng rng{6};
    const auto b = three_blobs(3, 15);
    const auto base = density_peaks_cluster(b.dm);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> p(b.dm.size());
        std::iota(p.begin(), p.end(), 0);
        for (std::size_t i = p.size() - 1; i > 0; --i) {
            std::swap(p[i], p[rng.below(i + 1)]);
        }
        const auto r = density_peaks_cluster(permuted(b.dm, p));
        std::vector<int> back(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            back[p[i]] = r.labels[i];
        }
        CHECK(oracle::same_partition(back, base.labels));
    }
    const auto scaled = density_peaks_cluster(b.dm.scaled(17.0));
    CHECK(oracle::same_partition(scaled.labels, base.labels));
}

TEST_CASE("population weights order cluster ids") {
    const auto b = three_blobs(1);
    std::vector<double> population(b.dm.size(), 1.0);
    for (std::size_t i = 40; i < 60; ++i) {
        population[i] = 100.0;
    }
    const auto r = density_peaks_cluster(b.dm, {}, population);
    CHECK(r.labels[45] == 0);
    CHECK_THROWS_AS(density_peaks_cluster(b.dm, {}, std::vector<double>(3, 1.0)), InvalidInput);
}

TEST_CASE("kmeans baseline") {
    const std::vector<double> pts{0, 0, 0, 10, 10, 10};
    const auto two = kmeans_baseline(pts, 2, 1);
    CHECK(two[0] == two[1]);
    CHECK(two[1] == two[2]);
    CHECK(two[3] == two[4]);
    CHECK(two[4] == two[5]);
    CHECK(two[0] != two[3]);
    const auto one = kmeans_baseline(pts, 1, 1);
    CHECK(std::all_of(one.begin(), one.end(), [&](int l) { return l == one[0]; }));
    CHECK_THROWS_AS(kmeans_baseline(pts, 0, 1), InvalidParameter);
    CHECK_THROWS_AS(kmeans_baseline(pts, 3, 1), InvalidParameter);

    Rng rng{8};
    std::vector<double> x(300);
    for (double& v : x) {
        v = rng.normal(0.0, 3.0);
    }
    const auto labels = kmeans_baseline(x, 4, 9);
    CHECK(labels == kmeans_baseline(x, 4, 9));
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return x[a] < x[c]; });
    std::size_t switches = 0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        switches += labels[order[i]] != labels[order[i - 1]];
    }
    CHECK(switches == 3);
}
