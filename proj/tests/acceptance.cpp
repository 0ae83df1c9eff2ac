// Acceptance checks. Usage: acceptance [criterion numbers...]; no arguments runs all.
// Prints one PASS/FAIL line per criterion and exits nonzero when any selected check fails.

#include "oracles.hpp"

#include "wcpd/cli.hpp"
#include "wcpd/clustering.hpp"
#include "wcpd/cpd.hpp"
#include "wcpd/datagen.hpp"
#include "wcpd/eval.hpp"
#include "wcpd/io.hpp"
#include "wcpd/pipeline.hpp"
#include "wcpd/random.hpp"
#include "wcpd/spectro.hpp"
#include "wcpd/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace wcpd;
namespace fs = std::filesystem;

namespace {

constexpr double kExactRel = 1e-12;
constexpr double kPopulousShare = 0.05;

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel_err(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

std::vector<double> uniform_draws(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) {
        x = lo + (hi - lo) * rng.uniform();
    }
    return v;
}

std::vector<double> values(const TimeSeries& s) {
    return {s.values().begin(), s.values().end()};
}

// Clusters holding at least `share` of the points, with their point labels.
std::vector<int> populous_labels(const std::vector<int>& point_labels, double share) {
    std::map<int, std::size_t> count;
    for (int l : point_labels) {
        ++count[l];
    }
    std::vector<int> out;
    for (const auto& [label, n] : count) {
        if (static_cast<double>(n) >= share * static_cast<double>(point_labels.size())) {
            out.push_back(label);
        }
    }
    return out;
}

Outcome transport_oracle() {
    const auto start = Clock::now();
    Rng rng{101};
    double worst = 0.0;
    int exact = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + rng.below(6);
        const auto x = uniform_draws(rng, n, -10, 10);
        const auto y = uniform_draws(rng, n, -10, 10);
        const double e = rel_err(w2_squared_equal(EmpiricalMeasure1D{x}, EmpiricalMeasure1D{y}),
                                 oracle::w2_squared_permutation(x, y));
        worst = std::max(worst, e);
        exact += e < kExactRel;
    }
    const double t = seconds_since(start);
    return {exact == 200 && t < 1.0,
            fmt("%d/200 within %.0e, max rel err %.2e, %.3f s (limit 1 s)", exact, kExactRel, worst, t)};
}

Outcome circular_oracle() {
    const auto start = Clock::now();
    Rng rng{102};
    double worst = 0.0;
    int exact = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + rng.below(64);
        const auto x = uniform_draws(rng, n, 0, 360);
        const auto y = uniform_draws(rng, n, 0, 360);
        const double e = rel_err(w2_squared_circular(CircularMeasure{x, 360.0}, CircularMeasure{y, 360.0}),
                                 oracle::w2_squared_cut_points(x, y, 360.0));
        worst = std::max(worst, e);
        exact += e < kExactRel;
    }
    const double t = seconds_since(start);
    return {exact == 200 && t < 5.0,
            fmt("%d/200 within %.0e, max rel err %.2e, %.3f s (limit 5 s)", exact, kExactRel, worst, t)};
}

Outcome quantile_consistency() {
    Rng rng{103};
    double worst = 0.0;
    int ok = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + rng.below(64);
        const EmpiricalMeasure1D mu{uniform_draws(rng, n, -5, 5)};
        const EmpiricalMeasure1D nu{uniform_draws(rng, n, -2, 8)};
        const double e = rel_err(w2_squared_quantile(mu, nu), w2_squared_equal(mu, nu));
        worst = std::max(worst, e);
        ok += e < kExactRel;
    }
    return {ok == 200, fmt("%d/200 within %.0e, max rel err %.2e", ok, kExactRel, worst)};
}

Outcome abrupt_change() {
    const auto start = Clock::now();
    const std::size_t w = 100;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng{1000 + seed};
        std::vector<double> v(10000);
        for (std::size_t t = 0; t < v.size(); ++t) {
            v[t] = t < 5000 ? rng.normal(0.0, 0.85) : rng.normal(1.0, 0.75);
        }
        const auto m = metric_derivative(TimeSeries{v}, w);
        const auto k = static_cast<std::size_t>(std::max_element(m.speeds.begin(), m.speeds.end()) - m.speeds.begin());
        hits += std::abs(static_cast<long>(m.time_of(k)) - 5000) <= static_cast<long>(w);
    }
    const double t = seconds_since(start);
    return {hits >= 19 && t < 10.0, fmt("argmax within +-%zu of 5000 in %d/20 runs (need 19), %.2f s", w, hits, t)};
}

Outcome toy_table() {
    const auto start = Clock::now();
    double p = 0.0;
    double r = 0.0;
    std::size_t n_true = 0;
    std::size_t n_det = 0;
    const int seeds = 5;
    for (int seed = 0; seed < seeds; ++seed) {
        ToyConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        const auto g = gen_toy_laplace(cfg);
        DetectOptions opts;
        opts.window = 25;
        opts.quantile = 0.95;
        const auto d = detect_change_points(g.series, opts);
        const auto det = d.change_points.interior();
        const auto tru = g.truth.interior();
        const auto pr = averaged_pr(det, tru, 0, 100, 1, g.series.size());
        p += pr.mean_precision;
        r += pr.mean_recall;
        if (seed == 0) {
            n_true = tru.size();
            n_det = det.size();
        }
    }
    p /= seeds;
    r /= seeds;
    const double t = seconds_since(start);
    return {p >= 0.8 && r >= 0.8 && t < 30.0,
            fmt("seed 0: %zu true / %zu detected; mean over %d seeds: precision %.3f, recall %.3f (need 0.80), %.2f s",
                n_true, n_det, seeds, p, r, t)};
}

Outcome toy_clustering() {
    int exact3 = 0;
    std::map<std::size_t, int> histogram;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ToyConfig cfg;
        cfg.seed = seed;
        const auto g = gen_toy_laplace(cfg);
        const auto r = identify_states_1d(g.series, {});
        const auto big = populous_labels(r.point_labels, kPopulousShare);
        ++histogram[big.size()];
        exact3 += big.size() == 3;
    }
    std::string h;
    for (const auto& [k, n] : histogram) {
        h += fmt(" %zu:%d", k, n);
    }
    return {exact3 >= 16, fmt("exactly 3 clusters >= 5%% of points in %d/20 seeds (need 16); populous-cluster "
                              "counts:%s",
                              exact3, h.c_str())};
}

Outcome prinz_physics() {
    const auto start = Clock::now();
    double worst_fd = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = -1.0 + 2.0 * i / 1000.0;
        const double fd = oracle::central_difference([](double y) { return prinz_potential(y).value; }, x, 1e-6);
        const double an = prinz_potential(x).derivative;
        worst_fd = std::max(worst_fd, std::abs(fd - an) / std::max(std::abs(an), 1.0));
    }

    SdeConfig longrun = prinz_preset(7);
    longrun.h = 1e-4;
    longrun.substeps = 10;
    longrun.n_samples = 1000000;
    const auto traj = values(gen_prinz(longrun));
    const std::size_t bins = 100;
    std::vector<double> count(bins, 0.0);
    for (double x : traj) {
        if (x >= -1.0 && x < 1.0) {
            count[static_cast<std::size_t>((x + 1.0) / 2.0 * bins)] += 1.0;
        }
    }
    std::vector<double> log_hist;
    std::vector<double> neg_v;
    for (std::size_t b = 0; b < bins; ++b) {
        if (count[b] >= 100.0) {
            const double center = -1.0 + (static_cast<double>(b) + 0.5) * 2.0 / bins;
            log_hist.push_back(std::log(count[b]));
            neg_v.push_back(-prinz_potential(center).value / longrun.kT);
        }
    }
    const double corr = oracle::pearson(log_hist, neg_v);

    const auto separators = oracle::local_maxima([](double y) { return prinz_potential(y).value; }, -0.9, 0.9);
    const auto series = gen_prinz(prinz_preset(0));
    PipelineOptions opts;
    opts.window = 16;
    opts.quantile = 0.5;
    const auto r = identify_states_1d(series, opts);
    const auto v = values(series);
    std::set<std::size_t> basins;
    const auto big = populous_labels(r.point_labels, kPopulousShare);
    for (int label : big) {
        std::vector<double> pts;
        for (std::size_t t = 0; t < v.size(); ++t) {
            if (r.point_labels[t] == label) {
                pts.push_back(v[t]);
            }
        }
        basins.insert(oracle::basin_of(oracle::median(pts), separators));
    }
    const double t = seconds_since(start);
    const bool pass = worst_fd < 1e-6 && corr > 0.9 && big.size() >= 4 && basins.size() >= 4 && t < 120.0;
    return {pass, fmt("dV max err relative to max(|dV|,1) %.2e (need < 1e-6); log-histogram corr with -V/kT %.4f over %zu bins (need "
                      "> 0.9); %zu populous clusters covering %zu distinct basins (need 4); %.1f s",
                      worst_fd, corr, log_hist.size(), big.size(), basins.size(), t)};
}

Outcome double_well() {
    int exact3 = 0;
    std::map<std::size_t, int> histogram;
    PipelineOptions opts;
    opts.window = 215;
    opts.quantile = 0.86;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto series = gen_double_well(double_well_preset(seed), kDefaultDoubleWellBarrier);
        const auto r = identify_states_1d(series, opts);
        const auto big = populous_labels(r.point_labels, kPopulousShare);
        ++histogram[big.size()];
        exact3 += big.size() == 3;
    }
    std::string h;
    for (const auto& [k, n] : histogram) {
        h += fmt(" %zu:%d", k, n);
    }
    return {exact3 >= 16,
            fmt("exactly 3 clusters >= 5%% of points in %d/20 seeds (need 16); populous-cluster counts:%s", exact3,
                h.c_str())};
}

Outcome column_count() {
    const std::size_t n = 421848;
    std::vector<double> padded(n, 0.0);
    for (std::size_t i = 0; i < 100000; ++i) {
        padded[i] = std::sin(2.0 * M_PI * 700.0 * static_cast<double>(i) / 11718.0);
    }
    const auto spec = compute_spectrogram(padded);
    const std::size_t formula = spectrogram_column_count(n, 512, 64);
    return {formula == 941 && spec.columns.size() == 941,
            fmt("formula %zu, computed %zu columns (need 941)", formula, spec.columns.size())};
}

Outcome lfm_detection() {
    const double rate = 11718.0;
    const std::size_t hop = 448;
    auto chirp = [&](double f0, double f1, std::size_t n) {
        std::vector<double> v(n);
        const double d = static_cast<double>(n) / rate;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / rate;
            v[i] = std::sin(2.0 * M_PI * (f0 * t + (f1 - f0) * t * t / (2.0 * d)));
        }
        return v;
    };
    // Silence, chirp 500->2000 Hz, gap, chirp 1000->3000 Hz, silence; edges on the frame grid.
    std::vector<double> x;
    std::vector<std::size_t> truth;
    auto append = [&](const std::vector<double>& part) {
        x.insert(x.end(), part.begin(), part.end());
    };
    append(std::vector<double>(12 * hop, 0.0));
    truth.push_back(x.size());
    append(chirp(500.0, 2000.0, 26 * hop));
    truth.push_back(x.size());
    append(std::vector<double>(12 * hop, 0.0));
    truth.push_back(x.size());
    append(chirp(1000.0, 3000.0, 26 * hop));
    truth.push_back(x.size());
    append(std::vector<double>(4 * hop + 64, 0.0));

    SpectrogramParams p;
    p.sample_rate = rate;
    const auto spec = compute_spectrogram(x, p);
    const auto cps = column_change_points(spec, 0.95);
    const auto pr = averaged_pr(cps.sample_indices, truth, 1536, 12800, 1, x.size());
    const auto strict = precision_recall(cps.sample_indices, truth, 1536, x.size());
    const bool pass = strict.recall == 1.0 && pr.mean_precision >= 0.5 && pr.mean_recall >= 0.5;
    return {pass, fmt("%zu true / %zu detected; recall at tol 1536 = %.3f; mean precision %.3f, mean recall %.3f "
                      "over tol 1536..12800 (need 0.5)",
                      truth.size(), cps.sample_indices.size(), strict.recall, pr.mean_precision, pr.mean_recall)};
}

double median_time(const std::function<void()>& f, int runs) {
    std::vector<double> t;
    for (int i = 0; i < runs; ++i) {
        const auto start = Clock::now();
        f();
        t.push_back(seconds_since(start));
    }
    return oracle::median(t);
}

Outcome complexity() {
    Rng rng{104};
    auto channel = [&](std::size_t T) {
        std::vector<double> v(T);
        for (double& x : v) {
            x = rng.normal();
        }
        return v;
    };
    DetectOptions opts;
    opts.window = 50;
    opts.quantile = 0.9;
    const std::size_t T = 200000;
    const auto a = channel(T);
    const auto b = channel(2 * T);
    const double ta = median_time([&] { detect_change_points(TimeSeries{a}, opts); }, 5);
    const double tb = median_time([&] { detect_change_points(TimeSeries{b}, opts); }, 5);

    std::vector<std::vector<double>> chans;
    for (int d = 0; d < 4; ++d) {
        chans.push_back(channel(T / 2));
    }
    auto detect_all = [&](std::size_t D) {
        for (std::size_t d = 0; d < D; ++d) {
            detect_change_points(TimeSeries{chans[d]}, opts);
        }
    };
    const double d2 = median_time([&] { detect_all(2); }, 5);
    const double d4 = median_time([&] { detect_all(4); }, 5);
    const double rt = tb / ta;
    const double rd = d4 / d2;
    return {rt <= 2.5 && rd <= 2.5, fmt("T %zu -> %zu: %.3f s -> %.3f s, ratio %.2f; D 2 -> 4: %.3f s -> %.3f s, "
                                        "ratio %.2f (limit 2.5)",
                                        T, 2 * T, ta, tb, rt, d2, d4, rd)};
}

Outcome density_peaks() {
    Rng rng{105};
    std::vector<double> x;
    std::vector<int> truth;
    for (int blob = 0; blob < 3; ++blob) {
        for (int i = 0; i < 20; ++i) {
            x.push_back(10.0 * (blob + 1) + 0.1 * rng.uniform());
            truth.push_back(blob);
        }
    }
    DistanceMatrix dm{x.size()};
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            dm.set(i, j, std::abs(x[i] - x[j]));
        }
    }
    const auto base = density_peaks_cluster(dm);
    const double ari = oracle::adjusted_rand_index(base.labels, truth);
    int invariant = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> p(x.size());
        std::iota(p.begin(), p.end(), 0);
        for (std::size_t i = p.size() - 1; i > 0; --i) {
            std::swap(p[i], p[rng.below(i + 1)]);
        }
        DistanceMatrix shuffled{x.size()};
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t j = i + 1; j < x.size(); ++j) {
                shuffled.set(i, j, dm(p[i], p[j]));
            }
        }
        const auto r = density_peaks_cluster(shuffled);
        std::vector<int> back(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            back[p[i]] = r.labels[i];
        }
        invariant += oracle::same_partition(back, base.labels);
    }
    return {base.cluster_count() == 3 && ari == 1.0 && invariant == 50,
            fmt("%zu clusters, ARI %.6f (need 1.0), partition unchanged under %d/50 shuffles", base.cluster_count(),
                ari, invariant)};
}

struct CliRun {
    int code;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "wcpd");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, err.str()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        files[e.path().filename().string()] = io::read_file(e.path());
    }
    return files;
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "wcpd_acceptance_determinism";
    fs::remove_all(root);
    std::vector<double> audio(11718 * 2);
    for (std::size_t i = 0; i < audio.size(); ++i) {
        audio[i] = 0.5 * std::sin(2.0 * M_PI * (i < audio.size() / 2 ? 600.0 : 1800.0) * i / 11718.0);
    }
    io::write_file(root / "tone.wav", io::encode_wav(audio, 11718, true));
    const std::string g = (root / "gen").string();
    struct Step {
        std::string command;
        std::vector<std::string> args;
        std::string out;
    };
    const std::vector<Step> steps{
        {"generate", {"toy", "--seed", "9"}, g},
        {"generate", {"prinz", "--seed", "9", "--samples", "2000"}, (root / "prinz").string()},
        {"generate", {"doublewell", "--seed", "9", "--samples", "2000"}, (root / "dw").string()},
        {"generate", {"torus", "--seed", "9"}, (root / "torus").string()},
        {"detect", {g + "/trajectory.csv", "-w", "25", "-q", "0.95"}, (root / "detect").string()},
        {"pipeline", {g + "/trajectory.csv"}, (root / "pipeline").string()},
        {"pipeline", {(root / "torus" / "trajectory.csv").string(), "--circular"}, (root / "torus_pipe").string()},
        {"spectrogram", {(root / "tone.wav").string()}, (root / "spec").string()},
        {"evaluate",
         {"--detected", (root / "detect" / "changepoints.json").string(), "--truth", g + "/truth.json"},
         (root / "eval").string()},
    };
    int identical = 0;
    std::string failures;
    for (const auto& s : steps) {
        std::vector<std::string> args{s.command};
        args.insert(args.end(), s.args.begin(), s.args.end());
        args.insert(args.end(), {"--out", s.out});
        const auto first = cli(args);
        const auto second = cli({s.command, "--config", s.out + "/meta.json", "--out", s.out + "_rerun"});
        const bool same = first.code == 0 && second.code == 0 && snapshot(s.out) == snapshot(s.out + "_rerun");
        identical += same;
        if (!same) {
            failures += " " + s.command + "(" + first.err + second.err + ")";
        }
    }
    fs::remove_all(root);
    return {identical == static_cast<int>(steps.size()),
            fmt("%d/%zu command runs reproduced byte-identically from meta.json%s", identical, steps.size(),
                failures.c_str())};
}

struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "transport oracle equivalence", transport_oracle},
    {2, "circular oracle equivalence", circular_oracle},
    {3, "quantile/sorted consistency", quantile_consistency},
    {4, "abrupt change located by the speed maximum", abrupt_change},
    {5, "toy precision/recall", toy_table},
    {6, "toy clustering into three states", toy_clustering},
    {7, "Prinz potential physics and basins", prinz_physics},
    {8, "double-well three-state recovery", double_well},
    {9, "spectrogram column count", column_count},
    {10, "synthetic LFM detection", lfm_detection},
    {11, "linear complexity in T and D", complexity},
    {12, "density peaks correctness", density_peaks},
    {13, "CLI determinism from meta.json", determinism},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }
    int failed = 0;
    for (const auto& c : kCriteria) {
        if (!selected.empty() && selected.count(c.id) == 0) {
            continue;
        }
        Outcome o{false, ""};
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
