#pragma once

// Station tables exported from sensor networks (one row per station) and
// their conversion into a k-NN graph plus a measured signal.
//
// Input schema: header `id,lat,lon,elev_m,<value column>[,...]`, one station
// per row, `#` comment lines ignored. Elevation is in meters.

#include "builders.hpp"
#include "error.hpp"
#include "format.hpp"
#include "graph.hpp"
#include "signals.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gsrcv {

struct StationRow {
    std::string id;
    double latitude = 0.0;
    double longitude = 0.0;
    double elevation_m = 0.0;
    std::optional<double> value;  ///< absent when the measurement is missing
    std::size_t line = 0;         ///< source line, for diagnostics
};

struct StationTable {
    std::string value_column;
    std::vector<StationRow> rows;

    std::size_t present_count() const {
        return static_cast<std::size_t>(std::count_if(
            rows.begin(), rows.end(), [](const StationRow& r) { return r.value.has_value(); }));
    }
};

struct StationCsvOptions {
    std::string value_column;
    std::set<std::string, std::less<>> missing_tokens{"", "NA", "-9999"};
};

namespace detail {

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_record(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    out.push_back(std::move(cell));
    return out;
}

} // namespace detail

inline StationTable parse_station_csv(std::istream& in, const StationCsvOptions& opts,
                                      const std::string& source = "station csv") {
    require(!opts.value_column.empty(), "value column name must not be empty");
    StationTable table;
    table.value_column = opts.value_column;

    std::string line;
    std::size_t line_no = 0;
    std::optional<std::vector<std::string>> header;
    std::size_t col_id = 0, col_lat = 0, col_lon = 0, col_elev = 0, col_value = 0;
    std::set<std::string, std::less<>> ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);  // UTF-8 BOM
        }
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        auto fields = detail::split_csv_record(body);
        for (auto& f : fields) {
            f = std::string(trim(f));
        }

        if (!header) {
            header = fields;
            const auto find = [&](std::string_view name) {
                const auto it = std::find(header->begin(), header->end(), name);
                if (it == header->end()) {
                    std::string available;
                    for (const auto& h : *header) {
                        available += (available.empty() ? "" : ", ") + h;
                    }
                    fail(ErrorKind::parse, where + ": unknown column '" + std::string(name) +
                                               "'; available columns: " + available);
                }
                return static_cast<std::size_t>(it - header->begin());
            };
            col_id = find("id");
            col_lat = find("lat");
            col_lon = find("lon");
            col_elev = find("elev_m");
            col_value = find(opts.value_column);
            continue;
        }

        if (fields.size() != header->size()) {
            fail(ErrorKind::parse, where + ": expected " + std::to_string(header->size()) +
                                       " fields, found " + std::to_string(fields.size()));
        }
        const auto number = [&](std::size_t col, std::string_view name) {
            const auto v = parse_double(fields[col]);
            if (!v || !std::isfinite(*v)) {
                fail(ErrorKind::parse, where + ": field '" + std::string(name) + "' is not a number ('" +
                                           fields[col] + "')");
            }
            return *v;
        };

        StationRow row;
        row.line = line_no;
        row.id = fields[col_id];
        if (row.id.empty()) {
            fail(ErrorKind::parse, where + ": empty station id");
        }
        row.latitude = number(col_lat, "lat");
        row.longitude = number(col_lon, "lon");
        row.elevation_m = number(col_elev, "elev_m");
        if (row.latitude < -90.0 || row.latitude > 90.0) {
            fail(ErrorKind::parse, where + ": field 'lat' = " + fields[col_lat] + " outside [-90, 90]");
        }
        if (row.longitude < -180.0 || row.longitude > 180.0) {
            fail(ErrorKind::parse,
                 where + ": field 'lon' = " + fields[col_lon] + " outside [-180, 180]");
        }
        if (!opts.missing_tokens.contains(fields[col_value])) {
            row.value = number(col_value, opts.value_column);
        }
        if (!ids.insert(row.id).second) {
            fail(ErrorKind::parse, where + ": duplicate station id '" + row.id + "'");
        }
        table.rows.push_back(std::move(row));
    }
    if (!header) {
        fail(ErrorKind::parse, source + ": no header row");
    }
    return table;
}

inline StationTable parse_station_csv(const std::string& path, const StationCsvOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::io, "cannot open station file '" + path + "'");
    }
    return parse_station_csv(in, opts, path);
}

/// Graph and measured signal built from the stations that have a value.
/// Vertices are numbered in ascending station-id order, so the result does
/// not depend on the row order of the input file.
struct SensorExperiment {
    Graph graph;
    GraphSignal truth;                     ///< every vertex known and valued
    std::vector<std::string> station_ids;  ///< vertex -> station id
    std::vector<GeoPoint> points;          ///< vertex -> location (altitude in km)
    std::size_t dropped_missing = 0;

    std::optional<std::size_t> vertex_of(std::string_view id) const {
        const auto it = std::lower_bound(station_ids.begin(), station_ids.end(), id);
        if (it == station_ids.end() || *it != id) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - station_ids.begin());
    }
};

/// Stations whose value is missing are dropped. `elevation_scale` converts
/// elevation to the altitude unit of the distance (meters -> kilometers by
/// default).
inline SensorExperiment to_experiment(const StationTable& table, const KnnGraphConfig& cfg,
                                      double elevation_scale = 1e-3) {
    std::vector<const StationRow*> kept;
    for (const auto& row : table.rows) {
        if (row.value) {
            kept.push_back(&row);
        }
    }
    if (kept.size() < cfg.k + 1) {
        fail(ErrorKind::invalid_argument,
             "only " + std::to_string(kept.size()) + " stations with a '" + table.value_column +
                 "' value; a " + std::to_string(cfg.k) + "-NN graph needs at least " +
                 std::to_string(cfg.k + 1));
    }
    std::sort(kept.begin(), kept.end(),
              [](const StationRow* a, const StationRow* b) { return a->id < b->id; });

    SensorExperiment exp;
    exp.dropped_missing = table.rows.size() - kept.size();
    Vector values(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t v = 0; v < kept.size(); ++v) {
        const StationRow& row = *kept[v];
        exp.station_ids.push_back(row.id);
        exp.points.push_back({row.latitude, row.longitude, row.elevation_m * elevation_scale});
        values(static_cast<Eigen::Index>(v)) = *row.value;
    }
    exp.graph = knn_graph(exp.points, cfg);
    exp.truth = GraphSignal(std::move(values), VertexSet::all(kept.size()));
    return exp;
}

} // namespace gsrcv
