// gsrcv: bandwidth sweeps of cross-validated reconstruction error.
//
//   gsrcv synth  [options]   random regular graph + synthetic bandlimited signal
//   gsrcv sensor [options]   station CSV -> k-NN graph -> measured signal
//   gsrcv graph-info [options]
//
// Exit status: 0 success, 2 usage, 3 ingestion (parse / io), 4 numerical.

#include <gsrcv/gsrcv.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int exit_usage = 2;
constexpr int exit_ingest = 3;
constexpr int exit_numerical = 4;

int exit_code(gsrcv::ErrorKind kind) {
    switch (kind) {
    case gsrcv::ErrorKind::invalid_argument:
    case gsrcv::ErrorKind::infeasible:
        return exit_usage;
    case gsrcv::ErrorKind::parse:
    case gsrcv::ErrorKind::io:
        return exit_ingest;
    case gsrcv::ErrorKind::numerical:
        return exit_numerical;
    }
    return exit_numerical;
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        gsrcv::fail(gsrcv::ErrorKind::io, "cannot write '" + path + "'");
    }
    writer(out);
    if (!out) {
        gsrcv::fail(gsrcv::ErrorKind::io, "write to '" + path + "' failed");
    }
}

struct OutputPaths {
    std::string sweep;
    std::string graph;
    std::string signal;
    std::string folds;
};

void add_output_options(CLI::App& cmd, OutputPaths& out) {
    cmd.add_option("-o,--out", out.sweep, "sweep CSV path (default: stdout)");
    cmd.add_option("--write-graph", out.graph, "also write the graph edge list");
    cmd.add_option("--write-signal", out.signal, "also write the signal CSV (known = sampled)");
    cmd.add_option("--write-folds", out.folds, "also write the fold plan CSV");
}

void add_cv_options(CLI::App& cmd, gsrcv::CrossValSetup& cv, std::string& sweep, std::string& strategy) {
    cmd.add_option("--samples", cv.samples, "number of known vertices |S|")->capture_default_str();
    cmd.add_option("--folds", cv.folds, "folds per repeat")->capture_default_str();
    cmd.add_option("--repeats", cv.repeats, "repeats of the K-fold split")->capture_default_str();
    cmd.add_option("--sweep", sweep, "bandwidths, start:stop:step or a,b,c")->capture_default_str();
    cmd.add_option("--strategy", strategy, "known-set selection")
        ->check(CLI::IsMember({"random", "greedy-dopt"}))
        ->capture_default_str();
    cmd.add_option("--ref-bandwidth", cv.reference_bandwidth,
                   "reference bandwidth for greedy-dopt (default samples/2)");
    cmd.add_option("--clip", cv.clip_threshold, "singular-value clip threshold")->capture_default_str();
    cmd.add_option("--cutoff", cv.relative_cutoff, "relative pseudo-inverse cutoff")->capture_default_str();
}

void finish_cv(gsrcv::CrossValSetup& cv, const std::string& sweep, const std::string& strategy) {
    cv.bandwidths = gsrcv::parse_sweep_spec(sweep);
    cv.strategy = *gsrcv::parse_sampling_strategy(strategy);
}

void emit(const gsrcv::ExperimentRun& run, const OutputPaths& out) {
    for (const auto& w : run.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    if (out.sweep.empty()) {
        gsrcv::write_sweep_csv(std::cout, run.sweep);
    } else {
        write_file(out.sweep, [&](std::ostream& s) { gsrcv::write_sweep_csv(s, run.sweep); });
    }
    if (!out.graph.empty()) {
        write_file(out.graph, [&](std::ostream& s) { gsrcv::write_edge_list(s, run.graph); });
    }
    if (!out.signal.empty()) {
        write_file(out.signal, [&](std::ostream& s) { gsrcv::write_signal_csv(s, run.signal); });
    }
    if (!out.folds.empty()) {
        write_file(out.folds, [&](std::ostream& s) { gsrcv::write_fold_plan_csv(s, run.plan); });
    }
    std::cerr << "argmin weighted r=" << run.sweep.argmin_weighted()
              << ", naive r=" << run.sweep.argmin_naive();
    if (const auto a = run.sweep.argmin_actual()) {
        std::cerr << ", actual r=" << *a;
    }
    std::cerr << '\n';
}

void graph_info(const gsrcv::Graph& g, std::ostream& out) {
    const auto basis = gsrcv::spectral_decompose(g);
    const auto counts = g.neighbor_counts();
    const auto [dmin, dmax] = std::minmax_element(counts.begin(), counts.end());
    out << "vertices=" << g.size() << '\n'
        << "edges=" << g.edges().size() << '\n'
        << "min_degree=" << (counts.empty() ? 0 : *dmin) << '\n'
        << "max_degree=" << (counts.empty() ? 0 : *dmax) << '\n'
        << "components=" << gsrcv::connected_components(g) << '\n'
        << "zero_eigenvalues=" << basis.zero_eigenvalue_count() << '\n';
    if (g.size() >= 2) {
        out << "lambda_2=" << gsrcv::format_double(basis.eigenvalue(1)) << '\n';
    }
    if (g.size() >= 1) {
        out << "lambda_max=" << gsrcv::format_double(basis.eigenvalue(g.size() - 1)) << '\n';
    }
    out << "graph_hash=" << gsrcv::graph_hash(g) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-validated reconstruction error of bandlimited graph signals"};
    app.set_config("--config", "", "key = value configuration file; flags override it");
    bool ci = false;
    app.add_flag("--ci", ci, "CI mode: --seed becomes mandatory");
    app.require_subcommand(1);

    // synth
    gsrcv::SynthConfig synth;
    OutputPaths synth_out;
    std::string synth_sweep = "10:110:10";
    std::string synth_strategy = "random";
    auto* cmd_synth = app.add_subcommand("synth", "random regular graph with a noisy bandlimited signal");
    cmd_synth->add_option("--n", synth.n, "vertices")->capture_default_str();
    cmd_synth->add_option("--degree", synth.degree, "vertex degree")->capture_default_str();
    cmd_synth->add_option("--bw", synth.bandwidth, "true signal bandwidth")->capture_default_str();
    cmd_synth->add_option("--signal-power", synth.signal_power, "mean-square power of the bandlimited part")
        ->capture_default_str();
    cmd_synth->add_option("--noise", synth.noise_power, "mean-square noise power")->capture_default_str();
    auto* synth_seed = cmd_synth->add_option("--seed", synth.seed, "master seed")->capture_default_str();
    add_cv_options(*cmd_synth, synth.cv, synth_sweep, synth_strategy);
    add_output_options(*cmd_synth, synth_out);

    // sensor
    gsrcv::SensorConfig sensor;
    sensor.csv.value_column = "value";
    OutputPaths sensor_out;
    std::string sensor_sweep = "10:80:10";
    std::string sensor_strategy = "random";
    std::vector<std::string> missing{"", "NA", "-9999"};
    bool mutual = false;
    auto* cmd_sensor = app.add_subcommand("sensor", "station table to k-NN graph and measured signal");
    cmd_sensor->add_option("--stations", sensor.stations_path, "station CSV (id,lat,lon,elev_m,...)")
        ->required();
    cmd_sensor->add_option("--value-column", sensor.csv.value_column, "measurement column")
        ->capture_default_str();
    cmd_sensor->add_option("--missing", missing, "tokens that mark a missing value");
    cmd_sensor->add_option("--k-neighbors", sensor.knn.k, "nearest neighbors per station")
        ->capture_default_str();
    cmd_sensor->add_option("--sigma", sensor.knn.sigma_km, "Gaussian kernel width in km")
        ->capture_default_str();
    cmd_sensor->add_option("--elevation-scale", sensor.elevation_scale, "elevation unit -> km factor")
        ->capture_default_str();
    cmd_sensor->add_flag("--mutual", mutual, "keep only mutual nearest-neighbor edges");
    auto* sensor_seed = cmd_sensor->add_option("--seed", sensor.seed, "master seed")->capture_default_str();
    add_cv_options(*cmd_sensor, sensor.cv, sensor_sweep, sensor_strategy);
    add_output_options(*cmd_sensor, sensor_out);

    // graph-info
    std::string info_graph;
    std::vector<std::size_t> info_rr;
    std::uint64_t info_seed = 1;
    std::string info_stations;
    std::string info_column = "value";
    auto* cmd_info = app.add_subcommand("graph-info", "summary statistics of a graph");
    auto* info_graph_opt = cmd_info->add_option("--graph", info_graph, "edge-list file");
    auto* info_rr_opt = cmd_info->add_option("--random-regular", info_rr, "N D: build a random regular graph")
                            ->expected(2)
                            ->delimiter(',');
    auto* info_st_opt = cmd_info->add_option("--stations", info_stations, "station CSV");
    cmd_info->add_option("--value-column", info_column, "measurement column for --stations")
        ->capture_default_str();
    auto* info_seed_opt = cmd_info->add_option("--seed", info_seed, "seed for --random-regular");
    info_graph_opt->excludes(info_rr_opt)->excludes(info_st_opt);
    info_rr_opt->excludes(info_st_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (cmd_synth->parsed()) {
            if (ci && synth_seed->count() == 0) {
                std::cerr << "error: --seed is required with --ci\n";
                return exit_usage;
            }
            finish_cv(synth.cv, synth_sweep, synth_strategy);
            emit(gsrcv::run_synth(synth), synth_out);
        } else if (cmd_sensor->parsed()) {
            if (ci && sensor_seed->count() == 0) {
                std::cerr << "error: --seed is required with --ci\n";
                return exit_usage;
            }
            finish_cv(sensor.cv, sensor_sweep, sensor_strategy);
            sensor.csv.missing_tokens = {missing.begin(), missing.end()};
            sensor.knn.union_symmetrization = !mutual;
            emit(gsrcv::run_sensor(sensor), sensor_out);
        } else if (cmd_info->parsed()) {
            if (ci && info_rr_opt->count() > 0 && info_seed_opt->count() == 0) {
                std::cerr << "error: --seed is required with --ci\n";
                return exit_usage;
            }
            gsrcv::Graph g;
            if (!info_graph.empty()) {
                std::ifstream in(info_graph);
                if (!in) {
                    gsrcv::fail(gsrcv::ErrorKind::io, "cannot open '" + info_graph + "'");
                }
                g = gsrcv::read_edge_list(in);
            } else if (!info_rr.empty()) {
                g = gsrcv::random_regular(info_rr[0], info_rr[1], info_seed);
            } else if (!info_stations.empty()) {
                gsrcv::StationCsvOptions opts;
                opts.value_column = info_column;
                g = gsrcv::to_experiment(gsrcv::parse_station_csv(info_stations, opts), {}).graph;
            } else {
                std::cerr << "error: graph-info needs one of --graph, --random-regular, --stations\n";
                return exit_usage;
            }
            graph_info(g, std::cout);
        }
    } catch (const gsrcv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
    return 0;
}
