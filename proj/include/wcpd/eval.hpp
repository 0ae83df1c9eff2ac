#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wcpd {

struct PRResult {
    double precision = 1.0;
    double recall = 1.0;
    std::size_t n_true = 0;
    std::size_t n_detected = 0;
    std::size_t matches = 0;
    std::size_t tolerance = 0;
};

/// Tolerance-windowed precision and recall of interior change points.
///
/// Both lists are sorted and stripped of the series boundaries (0 and
/// `length`, when a length is given) before matching. Matching is one-to-one:
/// detections are walked in order and each takes the earliest unmatched truth
/// point within `tol`. On sorted points with a common tolerance this yields a
/// maximum matching, so swapping the roles of the two lists swaps precision
/// and recall. Empty detection gives precision 1; empty truth gives recall 1.
PRResult precision_recall(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
                          std::size_t tol, std::size_t length = 0);

struct AveragedPR {
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double max_precision = 0.0;
    double max_recall = 0.0;
    std::vector<PRResult> per_tolerance;
};

/// precision_recall over the inclusive grid tol_min, tol_min + step, ..., <= tol_max.
AveragedPR averaged_pr(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
                       std::size_t tol_min, std::size_t tol_max, std::size_t tol_step = 1,
                       std::size_t length = 0);

} // namespace wcpd
