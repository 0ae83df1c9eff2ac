#include "wcpd/cli.hpp"

#include "wcpd/datagen.hpp"
#include "wcpd/errors.hpp"
#include "wcpd/eval.hpp"
#include "wcpd/io.hpp"
#include "wcpd/pipeline.hpp"
#include "wcpd/spectro.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace wcpd::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return {};
    }
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}


using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string json_scalar(const json& v, const std::string& key) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number()) {
        return v.dump();
    }
    throw UsageError("configuration key '" + key + "' must hold a scalar value");
}

KeyValues read_config(const fs::path& path, const std::string& command) {
    const std::string text = io::read_file(path);
    KeyValues kv;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        const json* cfg = &j;
        if (j.contains("command")) {
            if (!j["command"].is_string() || j["command"].get<std::string>() != command) {
                throw UsageError(path.string() + " records command " + j["command"].dump() + ", not '" + command +
                                 "'");
            }
            if (!j.contains("config") || !j["config"].is_object()) {
                throw UsageError(path.string() + " has no \"config\" object");
            }
            cfg = &j["config"];
        }
        for (const auto& [key, value] : cfg->items()) {
            if (!value.is_null()) {
                kv.emplace_back(key, json_scalar(value, key));
            }
        }
        return kv;
    }

    std::istringstream in{text};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || trim(line.substr(1, line.size() - 2)) != command) {
                throw UsageError(path.string() + ": section " + line + " does not match command '" + command + "'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ": expected key=value", line_no);
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) {
            throw ParseError(path.string() + ": empty key", line_no);
        }
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

// Values from the file fill options absent from the command line.
void apply_config(CLI::App& app, const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "config") {
            throw UsageError("configuration files cannot name another configuration file");
        }
        CLI::Option* opt = app.get_option_no_throw("--" + key);
        if (opt == nullptr) {
            opt = app.get_option_no_throw(key);
        }
        if (opt == nullptr) {
            throw UsageError("unknown configuration key '" + key + "' for command '" + app.get_name() + "'");
        }
        if (opt->count() > 0) {
            continue;
        }
        opt->add_result(value);
        opt->run_callback();
    }
}


struct Common {
    std::string config;
    std::string out = "wcpd_out";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config,
                    "Configuration file: key=value lines or a JSON object such as a previous meta.json. "
                    "Command-line flags take precedence");
    sub->add_option("--out", c.out, "Output directory (environment: WCPD_OUT)")
        ->envname("WCPD_OUT")
        ->capture_default_str();
}

void finish_config(CLI::App& sub, const Common& c) {
    if (!c.config.empty()) {
        apply_config(sub, read_config(c.config, sub.get_name()));
    }
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

void write_json(const fs::path& path, const json& j) {
    io::write_file(path, dump(j));
}

void write_meta(const fs::path& dir, const std::string& command, const json& config) {
    json meta;
    meta["tool"] = "wcpd";
    meta["command"] = command;
    meta["config"] = config;
    write_json(dir / "meta.json", meta);
}

InflectionMode parse_inflection(const std::string& s) {
    if (s == "value") {
        return InflectionMode::value;
    }
    if (s == "gradient") {
        return InflectionMode::gradient;
    }
    throw UsageError("inflection must be 'value' or 'gradient', got '" + s + "'");
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss{text};
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
            throw UsageError(what + ": '" + item + "' is not a number");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw UsageError(what + " is empty");
    }
    return out;
}

std::vector<std::size_t> interior_union(const std::vector<ChangePointSet>& sets) {
    std::set<std::size_t> all;
    for (const auto& s : sets) {
        for (std::size_t i : s.interior()) {
            all.insert(i);
        }
    }
    return {all.begin(), all.end()};
}

std::string trajectory_csv(const std::vector<std::vector<double>>& channels, const std::vector<std::string>& names) {
    std::string s = "t";
    for (const auto& n : names) {
        s += "," + n;
    }
    s += "\n";
    const std::size_t T = channels.front().size();
    for (std::size_t t = 0; t < T; ++t) {
        s += std::to_string(t);
        for (const auto& c : channels) {
            s += "," + io::format_double(c[t]);
        }
        s += "\n";
    }
    return s;
}

std::vector<std::string> default_names(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d; ++i) {
        names.push_back("x" + std::to_string(i));
    }
    return names;
}

std::string matrix_csv(std::size_t n, const auto& at) {
    std::string s;
    for (std::size_t j = 0; j < n; ++j) {
        s += (j == 0 ? "s" : ",s") + std::to_string(j);
    }
    s += "\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 0) {
                s += ',';
            }
            s += io::format_double(at(i, j));
        }
        s += "\n";
    }
    return s;
}

json to_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) {
        a.push_back(x);
    }
    return a;
}

struct GenerateArgs {
    Common common;
    std::string kind;
    std::uint64_t seed = 0;

    double m1 = 100.0;
    double m2 = 200.0;
    double variance = 20.0;
    std::string variance_meaning = "variance";
    std::size_t segment_length = 480;
    std::size_t transition_length = 20;
    std::size_t cycles = 10;
    bool return_transitions = true;

    std::size_t samples = 0;
    double step = 0.0;
    std::size_t substeps = 0;
    double kT = 1.0;
    double mass = 1.0;
    double damping = 1.0;
    double x0 = 0.0;
    double barrier = kDefaultDoubleWellBarrier;

    std::string means = "300,300,60,60,300,300;150,340,340,150,150,340;60,60,180,180,300,300";
    std::string block_lengths = "1000,1000,1000,1000,1000,1000";
    double kappa = 50.0;
    double period = 360.0;

    CLI::Option* samples_opt = nullptr;
    CLI::Option* step_opt = nullptr;
    CLI::Option* substeps_opt = nullptr;
    CLI::Option* x0_opt = nullptr;
};

void setup_generate(CLI::App& app, GenerateArgs& a) {
    auto* sub = app.add_subcommand("generate", "Write a synthetic trajectory with ground truth");
    sub->add_option("kind", a.kind, "toy | prinz | doublewell | torus")
        ->check(CLI::IsMember({"toy", "prinz", "doublewell", "torus"}));
    sub->add_option("--seed", a.seed, "Seed for all randomness")->capture_default_str();
    sub->add_option("--m1", a.m1, "toy: mean of the first state")->capture_default_str();
    sub->add_option("--m2", a.m2, "toy: mean of the second state")->capture_default_str();
    sub->add_option("--variance", a.variance, "toy: Laplace spread, see --variance-meaning")->capture_default_str();
    sub->add_option("--variance-meaning", a.variance_meaning,
                    "toy: 'variance' (b = sqrt(v/2)) or 'scale' (b = v)")
        ->check(CLI::IsMember({"variance", "scale"}))
        ->capture_default_str();
    sub->add_option("--segment-length", a.segment_length, "toy: samples per stationary block")->capture_default_str();
    sub->add_option("--transition-length", a.transition_length, "toy: samples per interpolating block")
        ->capture_default_str();
    sub->add_option("--cycles", a.cycles, "toy: number of m1/m2 cycles")->capture_default_str();
    sub->add_option("--return-transitions", a.return_transitions,
                    "toy: interpolate from m2 back to m1 between cycles")
        ->capture_default_str();
    a.samples_opt = sub->add_option("--samples", a.samples, "prinz/doublewell: recorded samples");
    a.step_opt = sub->add_option("--step", a.step, "prinz/doublewell: integration step h");
    a.substeps_opt = sub->add_option("--substeps", a.substeps, "prinz/doublewell: steps per recorded sample");
    sub->add_option("--kT", a.kT, "prinz/doublewell: thermal energy")->capture_default_str();
    sub->add_option("--mass", a.mass, "prinz/doublewell: mass")->capture_default_str();
    sub->add_option("--damping", a.damping, "prinz/doublewell: damping")->capture_default_str();
    a.x0_opt = sub->add_option("--x0", a.x0, "prinz/doublewell: initial position");
    sub->add_option("--barrier", a.barrier, "doublewell: V = barrier (x^2 - 1)^2")->capture_default_str();
    sub->add_option("--means", a.means, "torus: per-channel block means, channels separated by ';'")
        ->capture_default_str();
    sub->add_option("--block-lengths", a.block_lengths, "torus: comma-separated block lengths")
        ->capture_default_str();
    sub->add_option("--kappa", a.kappa, "torus: concentration")->capture_default_str();
    sub->add_option("--period", a.period, "torus: period of the angles")->capture_default_str();
    add_common(sub, a.common);
}

int run_generate(CLI::App& sub, GenerateArgs& a, std::ostream& out) {
    finish_config(sub, a.common);
    if (a.kind.empty()) {
        throw UsageError("generate: missing kind (toy | prinz | doublewell | torus)");
    }
    const fs::path dir = a.common.out;
    json cfg;
    cfg["kind"] = a.kind;
    cfg["seed"] = a.seed;

    std::vector<std::vector<double>> channels;
    std::vector<ChangePointSet> truth;
    bool has_truth = true;

    if (a.kind == "toy") {
        ToyConfig c;
        c.m1 = a.m1;
        c.m2 = a.m2;
        c.b = a.variance_meaning == "variance" ? laplace_scale_from_variance(a.variance) : a.variance;
        c.segment_length = a.segment_length;
        c.transition_length = a.transition_length;
        c.n_cycles = a.cycles;
        c.return_transitions = a.return_transitions;
        c.seed = a.seed;
        auto g = gen_toy_laplace(c);
        channels.emplace_back(g.series.values().begin(), g.series.values().end());
        truth.push_back(g.truth);
        cfg["m1"] = a.m1;
        cfg["m2"] = a.m2;
        cfg["variance"] = a.variance;
        cfg["variance-meaning"] = a.variance_meaning;
        cfg["segment-length"] = a.segment_length;
        cfg["transition-length"] = a.transition_length;
        cfg["cycles"] = a.cycles;
        cfg["return-transitions"] = a.return_transitions;
    } else if (a.kind == "prinz" || a.kind == "doublewell") {
        const bool prinz = a.kind == "prinz";
        SdeConfig c = prinz ? prinz_preset(a.seed) : double_well_preset(a.seed);
        if (a.samples_opt->count() > 0) {
            c.n_samples = a.samples;
        }
        if (a.step_opt->count() > 0) {
            c.h = a.step;
        }
        if (a.substeps_opt->count() > 0) {
            c.substeps = a.substeps;
        }
        if (a.x0_opt->count() > 0) {
            c.x0 = a.x0;
        }
        c.kT = a.kT;
        c.mass = a.mass;
        c.damping = a.damping;
        const TimeSeries ts = prinz ? gen_prinz(c) : gen_double_well(c, a.barrier);
        channels.emplace_back(ts.values().begin(), ts.values().end());
        truth.emplace_back(std::vector<std::size_t>{}, ts.size());
        has_truth = false;
        cfg["samples"] = c.n_samples;
        cfg["step"] = c.h;
        cfg["substeps"] = c.substeps;
        cfg["kT"] = c.kT;
        cfg["mass"] = c.mass;
        cfg["damping"] = c.damping;
        cfg["x0"] = c.x0;
        if (!prinz) {
            cfg["barrier"] = a.barrier;
        }
    } else {
        TorusConfig c;
        std::stringstream ss{a.means};
        std::string channel;
        while (std::getline(ss, channel, ';')) {
            c.means.push_back(parse_number_list(channel, "--means"));
        }
        for (double len : parse_number_list(a.block_lengths, "--block-lengths")) {
            if (!(len >= 1.0) || len != std::floor(len)) {
                throw UsageError("--block-lengths must be positive integers");
            }
            c.block_lengths.push_back(static_cast<std::size_t>(len));
        }
        c.kappa = a.kappa;
        c.period = a.period;
        c.seed = a.seed;
        auto g = gen_torus_blocks(c);
        for (std::size_t d = 0; d < g.series.dimension(); ++d) {
            channels.push_back(g.series.channel(d));
        }
        truth = g.truth;
        cfg["means"] = a.means;
        cfg["block-lengths"] = a.block_lengths;
        cfg["kappa"] = a.kappa;
        cfg["period"] = a.period;
    }

    const std::size_t T = channels.front().size();
    io::write_file(dir / "trajectory.csv", trajectory_csv(channels, default_names(channels.size())));
    json t;
    t["length"] = T;
    t["ground_truth"] = has_truth;
    t["indices"] = interior_union(truth);
    t["channels"] = json::array();
    for (const auto& c : truth) {
        t["channels"].push_back(c.interior());
    }
    write_json(dir / "truth.json", t);
    write_meta(dir, "generate", cfg);
    out << "generate " << a.kind << ": " << T << " samples x " << channels.size() << " channel(s), "
        << t["indices"].size() << " ground-truth change points -> " << dir.string() << "\n";
    return kSuccess;
}

struct DetectArgs {
    Common common;
    std::string input;
    std::size_t window = 25;
    double quantile = 0.95;
    bool circular = false;
    double period = 360.0;
    std::string inflection = "value";
    bool unnormalized = false;
    // pipeline only
    double sigma = 1.0;
    double dc_percentile = DensityPeaksOptions{}.dc_percentile;
    double center_zscore = DensityPeaksOptions{}.center_zscore;
};

void add_detect_options(CLI::App* sub, DetectArgs& a) {
    sub->add_option("input", a.input, "Trajectory CSV (header row, optional leading 't' column)");
    sub->add_option("-w,--window", a.window, "Window size w")->capture_default_str();
    sub->add_option("-q,--quantile", a.quantile, "Quantile threshold q")->capture_default_str();
    sub->add_flag("--circular", a.circular, "Treat every channel as an angle on a circle");
    sub->add_option("--period", a.period, "Period of circular channels")->capture_default_str();
    sub->add_option("--inflection", a.inflection, "Run extrema on speed 'value' or its 'gradient'")
        ->check(CLI::IsMember({"value", "gradient"}))
        ->capture_default_str();
    sub->add_flag("--unnormalized-w2", a.unnormalized, "Scale speeds by sqrt(w)");
    add_common(sub, a.common);
}

json detect_config(const DetectArgs& a) {
    json cfg;
    cfg["input"] = a.input;
    cfg["window"] = a.window;
    cfg["quantile"] = a.quantile;
    cfg["circular"] = a.circular;
    cfg["period"] = a.period;
    cfg["inflection"] = a.inflection;
    cfg["unnormalized-w2"] = a.unnormalized;
    return cfg;
}

struct LoadedSeries {
    std::vector<std::string> names;
    std::vector<std::vector<double>> channels;
};

LoadedSeries load_series(const DetectArgs& a) {
    if (a.input.empty()) {
        throw UsageError("missing input CSV");
    }
    const auto table = io::read_csv(a.input);
    LoadedSeries s;
    s.channels = io::trajectory_channels(table);
    const std::size_t skip = table.columns.size() - s.channels.size();
    s.names.assign(table.header.begin() + static_cast<std::ptrdiff_t>(skip), table.header.end());
    return s;
}

Geometry geometry_of(const DetectArgs& a) {
    return a.circular ? Geometry::circular(a.period) : Geometry::linear();
}

int run_detect(CLI::App& sub, DetectArgs& a, std::ostream& out) {
    finish_config(sub, a.common);
    const auto series = load_series(a);
    const fs::path dir = a.common.out;
    DetectOptions opts{a.window, a.quantile, geometry_of(a), parse_inflection(a.inflection), a.unnormalized};

    std::vector<Detection> results;
    for (const auto& c : series.channels) {
        results.push_back(detect_change_points(TimeSeries{c}, opts));
    }
    const std::size_t T = series.channels.front().size();

    std::vector<ChangePointSet> sets;
    json cp;
    cp["length"] = T;
    cp["window"] = a.window;
    cp["quantile"] = a.quantile;
    cp["geometry"] = a.circular ? "circular" : "linear";
    if (a.circular) {
        cp["period"] = a.period;
    }
    cp["speeds"] = "speeds.csv";
    cp["channels"] = json::array();
    for (std::size_t d = 0; d < results.size(); ++d) {
        json ch;
        ch["channel"] = d;
        ch["name"] = series.names[d];
        ch["indices"] = results[d].change_points.interior();
        ch["threshold"] = results[d].threshold.threshold;
        ch["candidates"] = results[d].threshold.candidates.size();
        cp["channels"].push_back(ch);
        sets.push_back(results[d].change_points);
    }
    cp["indices"] = interior_union(sets);

    std::string speeds = "t";
    for (const auto& n : series.names) {
        speeds += "," + n;
    }
    speeds += "\n";
    const auto& first = results.front().speeds;
    for (std::size_t k = 0; k < first.speeds.size(); ++k) {
        speeds += std::to_string(first.time_of(k));
        for (const auto& r : results) {
            speeds += "," + io::format_double(r.speeds.speeds[k]);
        }
        speeds += "\n";
    }

    io::write_file(dir / "speeds.csv", speeds);
    write_json(dir / "changepoints.json", cp);
    write_meta(dir, "detect", detect_config(a));
    out << "detect: " << cp["indices"].size() << " interior change points over " << series.channels.size()
        << " channel(s) -> " << dir.string() << "\n";
    return kSuccess;
}

int run_pipeline(CLI::App& sub, DetectArgs& a, std::ostream& out) {
    finish_config(sub, a.common);
    const auto loaded = load_series(a);
    const fs::path dir = a.common.out;
    const std::size_t D = loaded.channels.size();
    const std::size_t T = loaded.channels.front().size();

    PipelineOptions opts;
    opts.window = a.window;
    opts.quantile = a.quantile;
    opts.inflection = parse_inflection(a.inflection);
    opts.unnormalized = a.unnormalized;
    opts.sigma = a.sigma;
    opts.density.dc_percentile = a.dc_percentile;
    opts.density.center_zscore = a.center_zscore;
    const MultiSeries series{loaded.channels, std::vector<Geometry>(D, geometry_of(a))};
    const auto result = identify_states_multi(series, opts);

    std::string labels = "t";
    for (const auto& n : loaded.names) {
        labels += ",label_" + n;
    }
    labels += ",composite\n";
    std::map<std::string, std::size_t> composite_counts;
    for (std::size_t t = 0; t < T; ++t) {
        labels += std::to_string(t);
        for (std::size_t d = 0; d < D; ++d) {
            labels += "," + std::to_string(result.labels.channel_labels[d][t]);
        }
        const std::string c = result.labels.composite(t);
        ++composite_counts[c];
        labels += "," + c + "\n";
    }

    json segments;
    segments["length"] = T;
    segments["channels"] = json::array();
    json clusters;
    clusters["channels"] = json::array();
    for (std::size_t d = 0; d < D; ++d) {
        const auto& r = result.channels[d];
        json sc;
        sc["channel"] = d;
        sc["name"] = loaded.names[d];
        const auto bounds = r.segmentation.boundaries.indices();
        sc["change_points"] = std::vector<std::size_t>(bounds.begin(), bounds.end());
        sc["segments"] = json::array();
        std::vector<std::size_t> points(r.clusters.cluster_count(), 0);
        std::vector<std::size_t> count(r.clusters.cluster_count(), 0);
        for (std::size_t s = 0; s < r.segmentation.segments.size(); ++s) {
            const auto [start, end] = r.segmentation.segments[s];
            const int label = r.clusters.labels[s];
            sc["segments"].push_back({{"start", start}, {"end", end}, {"label", label}});
            points[static_cast<std::size_t>(label)] += end - start;
            ++count[static_cast<std::size_t>(label)];
        }
        segments["channels"].push_back(sc);

        json cc;
        cc["channel"] = d;
        cc["name"] = loaded.names[d];
        cc["n_segments"] = r.segmentation.segments.size();
        cc["dc"] = r.clusters.dc;
        cc["distance_evaluations"] = r.distance_evaluations;
        cc["clusters"] = json::array();
        for (std::size_t k = 0; k < r.clusters.cluster_count(); ++k) {
            cc["clusters"].push_back({{"id", k},
                                      {"center_segment", r.clusters.centers[k]},
                                      {"points", points[k]},
                                      {"segments", count[k]}});
        }
        cc["segment_labels"] = r.clusters.labels;
        cc["rho"] = to_json(r.clusters.rho);
        cc["delta"] = to_json(r.clusters.delta);
        cc["gamma"] = to_json(r.clusters.gamma);
        clusters["channels"].push_back(cc);

        const std::string suffix = D > 1 ? "_ch" + std::to_string(d) : "";
        const std::size_t n = r.distances.size();
        io::write_file(dir / ("distance_matrix" + suffix + ".csv"),
                       matrix_csv(n, [&](std::size_t i, std::size_t j) { return r.distances(i, j); }));
        io::write_file(dir / ("similarity_matrix" + suffix + ".csv"),
                       matrix_csv(n, [&](std::size_t i, std::size_t j) { return r.similarity(i, j); }));
    }

    std::vector<std::pair<std::string, std::size_t>> states(composite_counts.begin(), composite_counts.end());
    std::stable_sort(states.begin(), states.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    clusters["composite_states"] = json::array();
    for (const auto& [label, n] : states) {
        clusters["composite_states"].push_back({{"label", label}, {"points", n}});
    }

    io::write_file(dir / "labels.csv", labels);
    write_json(dir / "segments.json", segments);
    write_json(dir / "clusters.json", clusters);
    json cfg = detect_config(a);
    cfg["sigma"] = a.sigma;
    cfg["dc-percentile"] = a.dc_percentile;
    cfg["center-zscore"] = a.center_zscore;
    write_meta(dir, "pipeline", cfg);

    out << "pipeline: " << states.size() << " composite state(s); top by population:";
    for (std::size_t i = 0; i < std::min<std::size_t>(4, states.size()); ++i) {
        out << " " << states[i].first << " (" << states[i].second << ")";
    }
    out << " -> " << dir.string() << "\n";
    return kSuccess;
}

struct SpectroArgs {
    Common common;
    std::string input;
    double sample_rate = 0.0;
    std::size_t nperseg = 512;
    std::size_t noverlap = 64;
    double alpha = 0.25;
    double quantile = 0.95;
    std::string inflection = "value";
    CLI::Option* rate_opt = nullptr;
};

bool is_wav(const std::string& path) {
    std::string ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext == ".wav";
}

int run_spectrogram(CLI::App& sub, SpectroArgs& a, std::ostream& out) {
    finish_config(sub, a.common);
    if (a.input.empty()) {
        throw UsageError("missing input (WAV or single-column CSV)");
    }
    std::vector<double> samples;
    double rate = a.sample_rate;
    if (is_wav(a.input)) {
        auto audio = io::read_wav(a.input);
        if (a.rate_opt->count() > 0 && a.sample_rate != audio.sample_rate) {
            throw UsageError("--sample-rate " + io::format_double(a.sample_rate) + " contradicts the WAV header (" +
                             io::format_double(audio.sample_rate) + " Hz)");
        }
        rate = audio.sample_rate;
        samples = std::move(audio.samples);
    } else {
        if (a.rate_opt->count() == 0) {
            throw UsageError("--sample-rate is required for CSV input");
        }
        auto channels = io::trajectory_channels(io::read_csv(a.input));
        if (channels.size() != 1) {
            throw InvalidInput("spectrogram CSV must hold exactly one sample column, found " +
                               std::to_string(channels.size()));
        }
        samples = std::move(channels.front());
    }

    SpectrogramParams p;
    p.sample_rate = rate;
    p.nperseg = a.nperseg;
    p.noverlap = a.noverlap;
    p.alpha = a.alpha;
    const auto spec = compute_spectrogram(samples, p);
    const auto cps = column_change_points(spec, a.quantile, parse_inflection(a.inflection));
    const fs::path dir = a.common.out;

    std::string csv = "frame,start_sample,time_s,power,zero_power";
    for (double f : spec.frequencies) {
        csv += ",f_" + io::format_double(f);
    }
    csv += "\n";
    std::vector<std::size_t> zero_frames;
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        csv += std::to_string(c) + "," + std::to_string(spec.frame_start(c)) + "," +
               io::format_double(spec.frame_time(c)) + "," + io::format_double(spec.column_power[c]) + "," +
               (spec.zero_power[c] ? "1" : "0");
        for (double w : spec.columns[c].weights()) {
            csv += "," + io::format_double(w);
        }
        csv += "\n";
        if (spec.zero_power[c]) {
            zero_frames.push_back(c);
        }
    }

    json fc;
    fc["length"] = samples.size();
    fc["indices"] = cps.sample_indices;
    fc["frames"] = cps.frames.interior();
    fc["n_frames"] = spec.columns.size();
    fc["hop"] = p.hop();
    fc["sample_rate"] = rate;
    fc["threshold"] = cps.threshold.threshold;
    fc["zero_power_frames"] = zero_frames;
    fc["speeds"] = to_json(cps.speeds.speeds);

    io::write_file(dir / "spectrogram.csv", csv);
    write_json(dir / "frame_changepoints.json", fc);
    json cfg;
    cfg["input"] = a.input;
    cfg["sample-rate"] = rate;
    cfg["nperseg"] = a.nperseg;
    cfg["noverlap"] = a.noverlap;
    cfg["alpha"] = a.alpha;
    cfg["quantile"] = a.quantile;
    cfg["inflection"] = a.inflection;
    write_meta(dir, "spectrogram", cfg);
    out << "spectrogram: " << spec.columns.size() << " columns, " << cps.sample_indices.size()
        << " change points -> " << dir.string() << "\n";
    return kSuccess;
}

struct EvalArgs {
    Common common;
    std::string detected;
    std::string truth;
    std::size_t tol_min = 0;
    std::size_t tol_max = 100;
    std::size_t tol_step = 1;
    int channel = -1;
};

struct PointFile {
    std::vector<std::size_t> indices;
    std::size_t length = 0;
};

PointFile load_points(const std::string& path, int channel) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    const json* arr = nullptr;
    if (j.is_array()) {
        arr = &j;
    } else if (j.is_object()) {
        if (channel >= 0) {
            if (!j.contains("channels") || !j["channels"].is_array() ||
                static_cast<std::size_t>(channel) >= j["channels"].size()) {
                throw InvalidInput(path + " has no channel " + std::to_string(channel));
            }
            const json& ch = j["channels"][static_cast<std::size_t>(channel)];
            arr = ch.is_array() ? &ch : (ch.contains("indices") ? &ch["indices"] : nullptr);
        } else if (j.contains("indices")) {
            arr = &j["indices"];
        }
    }
    if (arr == nullptr || !arr->is_array()) {
        throw InvalidInput(path + " holds no change point list (expected an \"indices\" array)");
    }
    PointFile p;
    for (const auto& v : *arr) {
        if (!v.is_number_unsigned()) {
            throw InvalidInput(path + ": change points must be nonnegative integers");
        }
        p.indices.push_back(v.get<std::size_t>());
    }
    if (j.is_object() && j.contains("length")) {
        p.length = j["length"].get<std::size_t>();
    }
    return p;
}

std::string pr_table(const AveragedPR& pr, std::size_t n_true, std::size_t n_detected) {
    std::ostringstream s;
    char row[256];
    std::snprintf(row, sizeof row, "%-12s | %-16s | %-9s | %-6s | %-13s | %-10s\n", "# True CPS", "# Detected CPS",
                  "Precision", "Recall", "Max Precision", "Max Recall");
    s << row;
    std::snprintf(row, sizeof row, "%12zu | %16zu | %9.3f | %6.3f | %13.3f | %10.3f\n", n_true, n_detected,
                  pr.mean_precision, pr.mean_recall, pr.max_precision, pr.max_recall);
    s << row;
    return s.str();
}

int run_evaluate(CLI::App& sub, EvalArgs& a, std::ostream& out) {
    finish_config(sub, a.common);
    if (a.detected.empty() || a.truth.empty()) {
        throw UsageError("evaluate needs --detected and --truth");
    }
    const auto det = load_points(a.detected, a.channel);
    const auto tru = load_points(a.truth, a.channel);
    if (det.length != 0 && tru.length != 0 && det.length != tru.length) {
        throw InvalidInput("mismatched files: " + a.detected + " covers " + std::to_string(det.length) +
                           " samples but " + a.truth + " covers " + std::to_string(tru.length));
    }
    const std::size_t length = std::max(det.length, tru.length);
    for (const auto* f : {&det, &tru}) {
        for (std::size_t i : f->indices) {
            if (length != 0 && i > length) {
                throw InvalidInput("change point " + std::to_string(i) + " exceeds the series length " +
                                   std::to_string(length));
            }
        }
    }
    const auto pr = averaged_pr(det.indices, tru.indices, a.tol_min, a.tol_max, a.tol_step, length);
    const auto& first = pr.per_tolerance.front();

    json r;
    r["detected"] = a.detected;
    r["truth"] = a.truth;
    r["length"] = length;
    r["tol_min"] = a.tol_min;
    r["tol_max"] = a.tol_max;
    r["tol_step"] = a.tol_step;
    r["n_true"] = first.n_true;
    r["n_detected"] = first.n_detected;
    r["mean_precision"] = pr.mean_precision;
    r["mean_recall"] = pr.mean_recall;
    r["max_precision"] = pr.max_precision;
    r["max_recall"] = pr.max_recall;
    r["per_tolerance"] = json::array();
    for (const auto& p : pr.per_tolerance) {
        r["per_tolerance"].push_back({{"tol", p.tolerance},
                                      {"precision", p.precision},
                                      {"recall", p.recall},
                                      {"matches", p.matches}});
    }
    const fs::path dir = a.common.out;
    const std::string table = pr_table(pr, first.n_true, first.n_detected);
    write_json(dir / "report.json", r);
    io::write_file(dir / "report.txt", table);
    json cfg;
    cfg["detected"] = a.detected;
    cfg["truth"] = a.truth;
    cfg["tol-min"] = a.tol_min;
    cfg["tol-max"] = a.tol_max;
    cfg["tol-step"] = a.tol_step;
    cfg["channel"] = a.channel;
    write_meta(dir, "evaluate", cfg);
    out << table;
    return kSuccess;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wasserstein change point detection and segment clustering", "wcpd"};
    app.require_subcommand(1);
    app.fallthrough(false);

    GenerateArgs gen;
    setup_generate(app, gen);

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Estimate the metric derivative and extract change points");
    add_detect_options(detect, det);

    DetectArgs pipe;
    auto* pipeline = app.add_subcommand("pipeline", "Segment, cluster segments and label every point");
    add_detect_options(pipeline, pipe);
    pipeline->add_option("--sigma", pipe.sigma, "Similarity bandwidth")->capture_default_str();
    pipeline->add_option("--dc-percentile", pipe.dc_percentile, "Density cutoff quantile of distances")
        ->capture_default_str();
    pipeline->add_option("--center-zscore", pipe.center_zscore, "Center rule threshold on log(gamma)")
        ->capture_default_str();

    SpectroArgs spec;
    auto* spectro = app.add_subcommand("spectrogram", "Change points between contiguous spectrogram columns");
    spectro->add_option("input", spec.input, "Mono WAV (16-bit PCM or 32-bit float) or single-column CSV");
    spec.rate_opt = spectro->add_option("--sample-rate", spec.sample_rate, "Samples per second (CSV input)");
    spectro->add_option("--nperseg", spec.nperseg, "Samples per STFT frame")->capture_default_str();
    spectro->add_option("--noverlap", spec.noverlap, "Overlap between frames")->capture_default_str();
    spectro->add_option("--alpha", spec.alpha, "Tukey window shape")->capture_default_str();
    spectro->add_option("-q,--quantile", spec.quantile, "Quantile threshold q")->capture_default_str();
    spectro->add_option("--inflection", spec.inflection, "Run extrema on speed 'value' or its 'gradient'")
        ->check(CLI::IsMember({"value", "gradient"}))
        ->capture_default_str();
    add_common(spectro, spec.common);

    EvalArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Tolerance-averaged precision and recall");
    evaluate->add_option("--detected", ev.detected, "JSON with an \"indices\" array (e.g. changepoints.json)");
    evaluate->add_option("--truth", ev.truth, "JSON with an \"indices\" array (e.g. truth.json)");
    evaluate->add_option("--tol-min", ev.tol_min, "Smallest tolerance")->capture_default_str();
    evaluate->add_option("--tol-max", ev.tol_max, "Largest tolerance")->capture_default_str();
    evaluate->add_option("--tol-step", ev.tol_step, "Tolerance grid step")->capture_default_str();
    evaluate->add_option("--channel", ev.channel, "Score one channel's list instead of the union")
        ->capture_default_str();
    add_common(evaluate, ev.common);

    try {
        app.parse(argc, argv);
        CLI::App* sub = app.get_subcommands().front();
        if (sub == detect) {
            return run_detect(*detect, det, out);
        }
        if (sub == pipeline) {
            return run_pipeline(*pipeline, pipe, out);
        }
        if (sub == spectro) {
            return run_spectrogram(*spectro, spec, out);
        }
        if (sub == evaluate) {
            return run_evaluate(*evaluate, ev, out);
        }
        return run_generate(*sub, gen, out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const InvalidParameter& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return kUsageError;
    } catch (const SimulationDiverged& e) {
        err << "simulation diverged: " << e.what() << "\n";
        return kUsageError;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kDataError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kDataError;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << "\n";
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        err << "invalid JSON content: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

} // namespace wcpd::cli
