#pragma once

// End-to-end experiment drivers shared by the command-line tool and the tests.

#include "builders.hpp"
#include "crossval.hpp"
#include "error.hpp"
#include "format.hpp"
#include "graph.hpp"
#include "ingest.hpp"
#include "sampling.hpp"
#include "signals.hpp"

#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gsrcv {

/// Parses `start:stop:step` (stop included when reached exactly) or a
/// comma-separated list of bandwidths.
inline std::vector<std::size_t> parse_sweep_spec(std::string_view text) {
    const auto bad = [&] {
        fail(ErrorKind::invalid_argument,
             "bad sweep '" + std::string(text) + "'; expected start:stop:step or a,b,c");
    };
    std::vector<std::size_t> out;
    if (text.find(':') != std::string_view::npos) {
        std::vector<std::uint64_t> parts;
        std::size_t pos = 0;
        while (true) {
            const auto next = text.find(':', pos);
            const auto v = parse_uint(text.substr(pos, next - pos));
            if (!v) {
                bad();
            }
            parts.push_back(*v);
            if (next == std::string_view::npos) {
                break;
            }
            pos = next + 1;
        }
        if (parts.size() != 3 || parts[2] == 0 || parts[0] == 0 || parts[0] > parts[1]) {
            bad();
        }
        for (auto r = parts[0]; r <= parts[1]; r += parts[2]) {
            out.push_back(static_cast<std::size_t>(r));
        }
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto next = std::min(text.find(',', pos), text.size());
            const auto v = parse_uint(text.substr(pos, next - pos));
            if (!v || *v == 0 || (!out.empty() && *v <= out.back())) {
                bad();
            }
            out.push_back(static_cast<std::size_t>(*v));
            pos = next + 1;
        }
    }
    return out;
}

inline std::string format_sweep(const std::vector<std::size_t>& bandwidths) {
    std::string s;
    for (const auto r : bandwidths) {
        s += (s.empty() ? "" : ",") + std::to_string(r);
    }
    return s;
}

/// Settings shared by every experiment after the graph and signal exist.
struct CrossValSetup {
    std::size_t samples = 200;
    std::size_t folds = 10;
    std::size_t repeats = 50;
    std::vector<std::size_t> bandwidths = parse_sweep_spec("10:110:10");
    SamplingStrategy strategy = SamplingStrategy::random;
    std::optional<std::size_t> reference_bandwidth;
    double clip_threshold = 1.0;
    double relative_cutoff = 1e-10;
};

struct SynthConfig {
    std::size_t n = 1000;
    std::size_t degree = 6;
    std::size_t bandwidth = 20;
    double signal_power = 1.0;
    double noise_power = 0.2;
    std::uint64_t seed = 1;
    CrossValSetup cv;
};

/// Sensor-network defaults: 100 known vertices, bandwidths 10..80.
inline CrossValSetup sensor_cv_defaults() {
    CrossValSetup cv;
    cv.samples = 100;
    cv.bandwidths = parse_sweep_spec("10:80:10");
    return cv;
}

struct SensorConfig {
    std::string stations_path;
    StationCsvOptions csv;
    KnnGraphConfig knn;
    double elevation_scale = 1e-3;
    std::uint64_t seed = 1;
    CrossValSetup cv = sensor_cv_defaults();
};

struct ExperimentRun {
    Graph graph;
    GraphSignal signal;  ///< full ground truth, known set = sampled vertices
    KnownSetSelection selection;
    FoldPlan plan;
    SweepResult sweep;
    std::vector<std::string> warnings;
};

/// Sub-seed streams derived from the master seed.
enum class SeedStream : std::uint64_t { graph = 10, signal = 11, sampling = 12, folds = 13 };

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
    return mix_seed(seed, static_cast<std::uint64_t>(stream));
}

namespace detail {

inline void add_meta(SweepResult& r, std::string key, std::string value) {
    r.metadata.emplace_back(std::move(key), std::move(value));
}

inline void add_setup_meta(SweepResult& r, const CrossValSetup& cv, const KnownSetSelection& sel) {
    add_meta(r, "samples", std::to_string(cv.samples));
    add_meta(r, "folds", std::to_string(cv.folds));
    add_meta(r, "repeats", std::to_string(cv.repeats));
    add_meta(r, "sweep", format_sweep(cv.bandwidths));
    add_meta(r, "strategy", std::string(to_string(cv.strategy)));
    if (cv.strategy == SamplingStrategy::greedy_dopt) {
        add_meta(r, "reference_bandwidth", std::to_string(sel.reference_bandwidth));
    }
    add_meta(r, "clip_threshold", format_double(cv.clip_threshold));
    add_meta(r, "relative_cutoff", format_double(cv.relative_cutoff));
}

// Sampling, folds and sweep on a graph whose full signal is known.
inline ExperimentRun cross_validate(Graph graph, const SpectralBasis& basis, const GraphSignal& truth,
                                    const CrossValSetup& cv, std::uint64_t seed) {
    SamplingOptions sopts;
    sopts.strategy = cv.strategy;
    sopts.seed = derive_seed(seed, SeedStream::sampling);
    sopts.reference_bandwidth = cv.reference_bandwidth;
    KnownSetSelection sel = select_known_set(basis, cv.samples, sopts);
    GraphSignal signal = truth.with_known(sel.vertices);
    FoldPlan plan = make_folds(sel.vertices, cv.folds, cv.repeats, derive_seed(seed, SeedStream::folds));

    CrossValOptions copts;
    copts.clip_threshold = cv.clip_threshold;
    copts.least_squares.relative_cutoff = cv.relative_cutoff;
    SweepResult result = sweep(basis, signal, cv.bandwidths, plan, copts);

    ExperimentRun run{std::move(graph), std::move(signal), std::move(sel), std::move(plan),
                      std::move(result), {}};
    run.warnings = run.selection.warnings;
    return run;
}

} // namespace detail

/// Random regular graph, synthetic noisy bandlimited signal, sweep.
inline ExperimentRun run_synth(const SynthConfig& cfg) {
    Graph graph = random_regular(cfg.n, cfg.degree, derive_seed(cfg.seed, SeedStream::graph));
    const SpectralBasis basis = spectral_decompose(graph);
    BandlimitedSpec spec;
    spec.bandwidth = cfg.bandwidth;
    spec.signal_power = cfg.signal_power;
    spec.noise_power = cfg.noise_power;
    spec.seed = derive_seed(cfg.seed, SeedStream::signal);
    const GraphSignal truth = synth_bandlimited(basis, spec);

    const std::string hash = graph_hash(graph);
    ExperimentRun run = detail::cross_validate(std::move(graph), basis, truth, cfg.cv, cfg.seed);
    auto& r = run.sweep;
    detail::add_meta(r, "command", "synth");
    detail::add_meta(r, "seed", std::to_string(cfg.seed));
    detail::add_meta(r, "n", std::to_string(cfg.n));
    detail::add_meta(r, "degree", std::to_string(cfg.degree));
    detail::add_meta(r, "bandwidth", std::to_string(cfg.bandwidth));
    detail::add_meta(r, "signal_power", format_double(cfg.signal_power));
    detail::add_meta(r, "noise_power", format_double(cfg.noise_power));
    detail::add_setup_meta(r, cfg.cv, run.selection);
    detail::add_meta(r, "graph_hash", hash);
    return run;
}

inline std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::io, "cannot open '" + path + "'");
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Fnv1a h;
    h.update(bytes);
    return h.hex();
}

/// Station table -> k-NN graph -> sweep on the measured values.
inline ExperimentRun run_sensor(const SensorConfig& cfg) {
    const StationTable table = parse_station_csv(cfg.stations_path, cfg.csv);
    SensorExperiment exp = to_experiment(table, cfg.knn, cfg.elevation_scale);
    const SpectralBasis basis = spectral_decompose(exp.graph);
    const std::string hash = graph_hash(exp.graph);
    const std::size_t coincident = coincident_pairs(exp.points);
    const std::size_t stations = exp.station_ids.size();

    ExperimentRun run = detail::cross_validate(std::move(exp.graph), basis, exp.truth, cfg.cv, cfg.seed);
    if (coincident > 0) {
        run.warnings.push_back(std::to_string(coincident) +
                               " station pairs share coordinates (edge weight 1)");
    }
    auto& r = run.sweep;
    detail::add_meta(r, "command", "sensor");
    detail::add_meta(r, "seed", std::to_string(cfg.seed));
    detail::add_meta(r, "stations", cfg.stations_path);
    detail::add_meta(r, "input_hash", file_hash(cfg.stations_path));
    detail::add_meta(r, "value_column", cfg.csv.value_column);
    detail::add_meta(r, "kept_stations", std::to_string(stations));
    detail::add_meta(r, "dropped_missing", std::to_string(exp.dropped_missing));
    detail::add_meta(r, "k_neighbors", std::to_string(cfg.knn.k));
    detail::add_meta(r, "sigma_km", format_double(cfg.knn.sigma_km));
    detail::add_meta(r, "symmetrization", cfg.knn.union_symmetrization ? "union" : "mutual");
    detail::add_meta(r, "elevation_scale", format_double(cfg.elevation_scale));
    detail::add_setup_meta(r, cfg.cv, run.selection);
    detail::add_meta(r, "graph_hash", hash);
    return run;
}

} // namespace gsrcv
