// Runs the gsrcv executable end to end.

#include <gtest/gtest.h>

#include <gsrcv/random.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status = -1;
    std::string out;
};

CliResult run(const std::string& args) {
    const std::string cmd = std::string(GSRCV_CLI) + " " + args + " 2>/dev/null";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        r.out.append(buf.data(), got);
    }
    const int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string fixture() { return std::string(GSRCV_DATA_DIR) + "/stations_300.csv"; }

fs::path temp_dir() {
    const fs::path p = fs::temp_directory_path() / ("gsrcv_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

std::vector<std::string> data_rows(const std::string& csv) {
    std::vector<std::string> out;
    for (const auto& l : lines_of(csv)) {
        if (!l.empty() && l[0] != '#' && l[0] != 'r') {
            out.push_back(l);
        }
    }
    return out;
}

std::string value_of(const std::string& text, const std::string& key) {
    for (const auto& l : lines_of(text)) {
        if (l.rfind(key + "=", 0) == 0) {
            return l.substr(key.size() + 1);
        }
    }
    return {};
}

const std::string small_synth = "synth --n 60 --degree 4 --bw 5 --samples 30 --folds 5 --repeats 2 --sweep 2:12:2";

} // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("--help").status, 0);
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("synth --bogus 1").status, 2);
    EXPECT_EQ(run("synth --strategy nope").status, 2);
    EXPECT_EQ(run("synth --n 5 --degree 3 --samples 3").status, 2);  // n * d odd
    EXPECT_EQ(run("synth --sweep 10:5:1").status, 2);
    EXPECT_EQ(run("--ci " + small_synth).status, 2);
    EXPECT_EQ(run("--ci " + small_synth + " --seed 1").status, 0);
    EXPECT_EQ(run(small_synth + " --strategy greedy-dopt --ref-bandwidth 8").status, 0);
}

TEST(Cli, IngestErrors) {
    EXPECT_EQ(run("sensor --stations /nonexistent.csv").status, 3);
    EXPECT_EQ(run("sensor --stations " + fixture() + " --value-column tmax").status, 3);
    const fs::path bad = temp_dir() / "bad.csv";
    std::ofstream(bad) << "id,lat,lon,elev_m,value\nA,95,0,0,1\n";
    EXPECT_EQ(run("sensor --stations " + bad.string()).status, 3);
    EXPECT_EQ(run("graph-info --graph /nonexistent.txt").status, 3);
}

TEST(Cli, SynthIsDeterministic) {
    const CliResult a = run(small_synth + " --seed 4");
    const CliResult b = run(small_synth + " --seed 4");
    const CliResult c = run(small_synth + " --seed 5");
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    EXPECT_EQ(data_rows(a.out).size(), 6u);
    EXPECT_NE(a.out.find("# seed=4"), std::string::npos);
    EXPECT_NE(a.out.find("# graph_hash="), std::string::npos);
}

TEST(Cli, ConfigFileMatchesFlags) {
    const fs::path cfg = temp_dir() / "run.ini";
    std::ofstream(cfg) << "[synth]\nn = 60\ndegree = 4\nbw = 5\nsamples = 30\nfolds = 5\nrepeats = 2\n"
                          "sweep = \"2:12:2\"\nseed = 4\n";
    const CliResult a = run("--config " + cfg.string() + " synth");
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(a.out, run(small_synth + " --seed 4").out);
}

TEST(Cli, WritesSideOutputs) {
    const fs::path dir = temp_dir();
    const std::string args = small_synth + " --seed 2 -o " + (dir / "sweep.csv").string() + " --write-graph " +
                             (dir / "g.txt").string() + " --write-signal " + (dir / "s.csv").string() +
                             " --write-folds " + (dir / "f.csv").string();
    ASSERT_EQ(run(args).status, 0);
    for (const auto* name : {"sweep.csv", "g.txt", "s.csv", "f.csv"}) {
        EXPECT_GT(fs::file_size(dir / name), 0u) << name;
    }
    const CliResult info = run("graph-info --graph " + (dir / "g.txt").string());
    ASSERT_EQ(info.status, 0);
    EXPECT_EQ(value_of(info.out, "vertices"), "60");
    EXPECT_EQ(value_of(info.out, "edges"), "120");
    EXPECT_EQ(value_of(info.out, "min_degree"), "4");
}

TEST(Cli, GraphInfoRandomRegular) {
    const CliResult info = run("graph-info --random-regular 10,3 --seed 1");
    ASSERT_EQ(info.status, 0);
    EXPECT_EQ(value_of(info.out, "vertices"), "10");
    EXPECT_EQ(value_of(info.out, "max_degree"), "3");
    EXPECT_EQ(run("graph-info --random-regular 3,3").status, 2);
}

TEST(Cli, SensorOnFixture) {
    const CliResult r = run("sensor --stations " + fixture() + " --value-column tavg --repeats 5 --seed 1");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(data_rows(r.out).size(), 8u);
    EXPECT_NE(r.out.find("# kept_stations=300"), std::string::npos);
    EXPECT_NE(r.out.find("# dropped_missing=6"), std::string::npos);
    // unsampled stations carry measurements, so the actual error is reported
    EXPECT_NE(r.out.find("# argmin_actual="), std::string::npos);
}

TEST(Cli, SensorIgnoresRowOrder) {
    std::ifstream in(fixture());
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) {
        lines.push_back(l);
    }
    // keep the comment and header, shuffle the stations
    gsrcv::Rng rng(99);
    rng.shuffle(std::span<std::string>(lines.data() + 2, lines.size() - 2));
    const fs::path shuffled = temp_dir() / "shuffled.csv";
    {
        std::ofstream out(shuffled);
        for (const auto& l : lines) {
            out << l << '\n';
        }
    }
    const std::string common = " --value-column tavg --repeats 3 --sweep 10,30 --seed 7";
    const CliResult a = run("sensor --stations " + fixture() + common);
    const CliResult b = run("sensor --stations " + shuffled.string() + common);
    ASSERT_EQ(a.status, 0);
    ASSERT_EQ(b.status, 0);
    EXPECT_EQ(data_rows(a.out), data_rows(b.out));
    EXPECT_EQ(value_of(a.out, "# graph_hash"), value_of(b.out, "# graph_hash"));

    const CliResult ia = run("graph-info --stations " + fixture() + " --value-column tavg");
    const CliResult ib = run("graph-info --stations " + shuffled.string() + " --value-column tavg");
    EXPECT_EQ(value_of(ia.out, "graph_hash"), value_of(ib.out, "graph_hash"));
    EXPECT_EQ(value_of(ia.out, "vertices"), "300");
}
