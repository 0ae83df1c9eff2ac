#include "wcpd/eval.hpp"

#include "wcpd/errors.hpp"

#include <algorithm>

namespace wcpd {

namespace {

std::vector<std::size_t> interior_sorted(std::span<const std::size_t> points, std::size_t length) {
    std::vector<std::size_t> out;
    for (std::size_t p : points) {
        if (p != 0 && (length == 0 || p != length)) {
            out.push_back(p);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

PRResult precision_recall(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
                          std::size_t tol, std::size_t length) {
    const auto det = interior_sorted(detected, length);
    const auto tru = interior_sorted(truth, length);

    PRResult r;
    r.n_detected = det.size();
    r.n_true = tru.size();
    r.tolerance = tol;

    // Truth points before j are matched or too far left for every later detection.
    std::size_t j = 0;
    for (std::size_t d : det) {
        while (j < tru.size() && tru[j] + tol < d) {
            ++j;
        }
        if (j < tru.size() && tru[j] <= d + tol) {
            ++r.matches;
            ++j;
        }
    }
    r.precision = det.empty() ? 1.0 : static_cast<double>(r.matches) / static_cast<double>(det.size());
    r.recall = tru.empty() ? 1.0 : static_cast<double>(r.matches) / static_cast<double>(tru.size());
    return r;
}

AveragedPR averaged_pr(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
                       std::size_t tol_min, std::size_t tol_max, std::size_t tol_step, std::size_t length) {
    if (tol_min > tol_max) {
        throw InvalidParameter("tolerance range: tol_min exceeds tol_max");
    }
    if (tol_step < 1) {
        throw InvalidParameter("tolerance step must be at least 1");
    }
    AveragedPR out;
    for (std::size_t tol = tol_min; tol <= tol_max; tol += tol_step) {
        const PRResult r = precision_recall(detected, truth, tol, length);
        out.mean_precision += r.precision;
        out.mean_recall += r.recall;
        out.max_precision = std::max(out.max_precision, r.precision);
        out.max_recall = std::max(out.max_recall, r.recall);
        out.per_tolerance.push_back(r);
    }
    const auto count = static_cast<double>(out.per_tolerance.size());
    out.mean_precision /= count;
    out.mean_recall /= count;
    return out;
}

} // namespace wcpd
