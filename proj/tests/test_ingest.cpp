#include "test_support.hpp"

#include <gsrcv/ingest.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace gsrcv;
using namespace gsrcv::testing;

namespace {

StationTable parse(const std::string& text, const std::string& column = "tavg") {
    std::istringstream in(text);
    StationCsvOptions opts;
    opts.value_column = column;
    return parse_station_csv(in, opts, "mem.csv");
}

std::string parse_error(const std::string& text, const std::string& column = "tavg") {
    try {
        parse(text, column);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        return e.what();
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return {};
}

// n stations on a regular lat/lon grid
std::string grid_csv(std::size_t rows, std::size_t cols) {
    std::ostringstream s;
    s << "id,lat,lon,elev_m,tavg\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t k = i * cols + j;
            s << "G" << (k < 10 ? "0" : "") << k << ',' << 36.0 + 0.13 * static_cast<double>(i) << ','
              << -120.0 + 0.17 * static_cast<double>(j) << ',' << 10 * k << ',' << 0.5 * static_cast<double>(k)
              << '\n';
        }
    }
    return s.str();
}

} // namespace

TEST(StationCsv, ParsesRowsAndMissingTokens) {
    const auto t = parse("id,lat,lon,elev_m,tavg\n"
                         "A,36.5,-120.25,100,12.5\n"
                         "B,37,-121,0,-9999\n"
                         "C,38.25,-119.5,1500.5,NA\n");
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.rows[0].id, "A");
    EXPECT_EQ(t.rows[0].latitude, 36.5);
    EXPECT_EQ(t.rows[0].longitude, -120.25);
    EXPECT_EQ(t.rows[2].elevation_m, 1500.5);
    EXPECT_EQ(t.rows[0].value, 12.5);
    EXPECT_FALSE(t.rows[1].value.has_value());
    EXPECT_FALSE(t.rows[2].value.has_value());
    EXPECT_EQ(t.present_count(), 1u);
}

TEST(StationCsv, ScientificNotationQuotesAndExtraColumns) {
    const auto t = parse("# comment\n"
                         "\xEF\xBB\xBF" "name,id,lat,lon,elev_m,tavg,other\n"
                         "\"Lake, North\",X1,3.65e1,-1.2e2,1e2,+1.5E0,7\n");
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].id, "X1");
    EXPECT_EQ(t.rows[0].latitude, 36.5);
    EXPECT_EQ(t.rows[0].longitude, -120.0);
    EXPECT_EQ(t.rows[0].value, 1.5);
}

TEST(StationCsv, Errors) {
    const auto lat = parse_error("id,lat,lon,elev_m,tavg\nA,91,0,0,1\n");
    EXPECT_NE(lat.find("mem.csv:2"), std::string::npos);
    EXPECT_NE(lat.find("'lat'"), std::string::npos);

    const auto unknown = parse_error("id,lat,lon,elev_m,tavg\n", "tmax");
    EXPECT_NE(unknown.find("tmax"), std::string::npos);
    EXPECT_NE(unknown.find("id, lat, lon, elev_m, tavg"), std::string::npos);

    const auto dup = parse_error("id,lat,lon,elev_m,tavg\nA,1,1,0,1\nA,2,2,0,2\n");
    EXPECT_NE(dup.find("duplicate"), std::string::npos);
    EXPECT_NE(dup.find(":3"), std::string::npos);

    EXPECT_NE(parse_error("id,lat,lon,elev_m,tavg\nA,1,x,0,1\n").find("'lon'"), std::string::npos);
    EXPECT_NE(parse_error("id,lat,lon,elev_m,tavg\nA,1,1,0\n").find("fields"), std::string::npos);
    EXPECT_NE(parse_error("id,lat,lon,elev_m,tavg\nA,1,1,0,abc\n").find("'tavg'"), std::string::npos);
    parse_error("");
}

TEST(StationCsv, MissingFileIsAnIoError) {
    StationCsvOptions opts;
    opts.value_column = "tavg";
    try {
        parse_station_csv(std::string("/nonexistent/stations.csv"), opts);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::io);
    }
}

TEST(ToExperiment, DropsMissingStations) {
    std::string text = "id,lat,lon,elev_m,tavg\n";
    for (int i = 0; i < 10; ++i) {
        text += "S" + std::to_string(i) + "," + std::to_string(36.0 + 0.1 * i) + ",-120," +
                std::to_string(10 * i) + "," + (i == 3 || i == 7 ? "NA" : std::to_string(i)) + "\n";
    }
    const auto exp = to_experiment(parse(text), KnnGraphConfig{});
    EXPECT_EQ(exp.graph.size(), 8u);
    EXPECT_EQ(exp.dropped_missing, 2u);
    EXPECT_FALSE(exp.vertex_of("S3").has_value());
    EXPECT_TRUE(exp.truth.has_ground_truth());
    for (std::size_t v = 0; v < 8; ++v) {
        EXPECT_EQ(exp.vertex_of(exp.station_ids[v]), v);
    }
    const auto v9 = *exp.vertex_of("S9");
    EXPECT_EQ(exp.truth.values(static_cast<Eigen::Index>(v9)), 9.0);
    EXPECT_NEAR(exp.points[v9].altitude_km, 0.09, 1e-15);
}

TEST(ToExperiment, AllMissingIsAnError) {
    const std::string text = "id,lat,lon,elev_m,tavg\nA,1,1,0,NA\nB,2,2,0,\nC,3,3,0,-9999\n";
    EXPECT_THROW(to_experiment(parse(text), KnnGraphConfig{}), Error);
}

TEST(ToExperiment, MatchesDirectKnnConstruction) {
    const auto table = parse(grid_csv(5, 10));
    const auto exp = to_experiment(table, KnnGraphConfig{});
    ASSERT_EQ(exp.graph.size(), 50u);
    std::vector<GeoPoint> pts;
    for (const auto& row : table.rows) {
        pts.push_back({row.latitude, row.longitude, row.elevation_m * 1e-3});
    }
    // ids G00..G49 sort like the row order, so vertex v is row v
    EXPECT_EQ(exp.graph, knn_graph(pts, KnnGraphConfig{}));
}

TEST(ToExperiment, RowOrderDoesNotMatter) {
    const std::string text = grid_csv(4, 6);
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        lines.push_back(l);
    }
    Rng rng(3);
    rng.shuffle(std::span<std::string>(lines.data() + 1, lines.size() - 1));
    std::string shuffled;
    for (const auto& l : lines) {
        shuffled += l + "\n";
    }
    const auto a = to_experiment(parse(text), KnnGraphConfig{});
    const auto b = to_experiment(parse(shuffled), KnnGraphConfig{});
    EXPECT_EQ(a.graph, b.graph);
    EXPECT_EQ(a.station_ids, b.station_ids);
    EXPECT_EQ(a.truth.values, b.truth.values);
}
