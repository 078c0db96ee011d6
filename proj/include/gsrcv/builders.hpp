#pragma once

// Experiment graphs: random regular graphs and geospatial k-nearest-neighbor
// graphs with Gaussian-kernel weights.

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace gsrcv {

/// Uniformly-ish random simple d-regular graph with unit weights.
///
/// Stubs (d per vertex) are paired at random; a candidate pair that would
/// create a self-loop or a repeated edge is redrawn, and the whole pairing is
/// restarted when no valid pair turns up after a bounded number of draws.
inline Graph random_regular(std::size_t n, std::size_t d, std::uint64_t seed,
                            std::size_t max_restarts = 1000) {
    if (d >= n) {
        fail(ErrorKind::infeasible, "random regular graph needs d < n (got n=" + std::to_string(n) +
                                        ", d=" + std::to_string(d) + ")");
    }
    if ((n * d) % 2 != 0) {
        fail(ErrorKind::infeasible, "random regular graph needs n*d even (got n=" +
                                        std::to_string(n) + ", d=" + std::to_string(d) + ")");
    }
    Rng rng(seed);
    std::vector<std::size_t> stubs;
    std::vector<std::vector<std::size_t>> adj(n);
    std::vector<Edge> edges;
    const auto adjacent = [&](std::size_t u, std::size_t v) {
        return std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end();
    };

    for (std::size_t attempt = 1; attempt <= max_restarts; ++attempt) {
        stubs.clear();
        for (std::size_t v = 0; v < n; ++v) {
            stubs.insert(stubs.end(), d, v);
        }
        for (auto& a : adj) {
            a.clear();
        }
        edges.clear();

        bool stuck = false;
        while (!stubs.empty() && !stuck) {
            stuck = true;
            const std::size_t tries = 50 + stubs.size();
            for (std::size_t t = 0; t < tries; ++t) {
                const auto a = static_cast<std::size_t>(rng.below(stubs.size()));
                const auto b = static_cast<std::size_t>(rng.below(stubs.size()));
                const auto u = stubs[a];
                const auto v = stubs[b];
                if (a == b || u == v || adjacent(u, v)) {
                    continue;
                }
                adj[u].push_back(v);
                adj[v].push_back(u);
                edges.push_back({u, v, 1.0});
                // remove the higher position first so the lower stays valid
                for (const auto pos : {std::max(a, b), std::min(a, b)}) {
                    stubs[pos] = stubs.back();
                    stubs.pop_back();
                }
                stuck = false;
                break;
            }
        }
        if (!stuck) {
            return Graph(n, std::move(edges));
        }
    }
    fail(ErrorKind::numerical, "random regular graph (n=" + std::to_string(n) + ", d=" +
                                   std::to_string(d) + ") not found after " +
                                   std::to_string(max_restarts) + " attempts");
}

/// Sensor location. Altitude is in kilometers.
struct GeoPoint {
    double latitude;
    double longitude;
    double altitude_km = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline constexpr double earth_radius_km = 6371.0088;

inline void validate(const GeoPoint& p) {
    require(p.latitude >= -90.0 && p.latitude <= 90.0,
            "latitude " + format_double(p.latitude) + " outside [-90, 90]");
    require(p.longitude >= -180.0 && p.longitude <= 180.0,
            "longitude " + format_double(p.longitude) + " outside [-180, 180]");
}

/// Great-circle distance on a sphere of radius earth_radius_km.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double phi1 = a.latitude * deg;
    const double phi2 = b.latitude * deg;
    const double dphi = (b.latitude - a.latitude) * deg;
    const double dlambda = (b.longitude - a.longitude) * deg;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
    return 2.0 * earth_radius_km * std::asin(std::sqrt(h));
}

/// sqrt(d_f^2 + d_a^2): flat great-circle distance combined with the
/// altitude difference, both in kilometers.
inline double geo_distance(const GeoPoint& a, const GeoPoint& b) {
    // evaluate in a canonical argument order so the result is exactly symmetric
    const auto key = [](const GeoPoint& p) {
        return std::tuple(p.latitude, p.longitude, p.altitude_km);
    };
    const GeoPoint& p = key(a) <= key(b) ? a : b;
    const GeoPoint& q = key(a) <= key(b) ? b : a;
    const double flat = haversine_km(p, q);
    const double alt = std::abs(p.altitude_km - q.altitude_km);
    return std::hypot(flat, alt);
}

struct KnnGraphConfig {
    std::size_t k = 5;
    double sigma_km = 50.0;
    /// true: edge when either endpoint lists the other (union);
    /// false: only mutual nearest neighbors.
    bool union_symmetrization = true;
};

/// exp(-d^2 / (2 sigma^2)), floored at the smallest normal double so that
/// distant neighbors keep a strictly positive weight.
inline double gaussian_weight(double distance, double sigma) {
    const double w = std::exp(-distance * distance / (2.0 * sigma * sigma));
    return std::max(w, std::numeric_limits<double>::min());
}

/// For each point, the indices of its k nearest other points, nearest first.
/// Equal distances prefer the lower index.
inline std::vector<std::vector<std::size_t>> nearest_neighbors(const std::vector<GeoPoint>& points,
                                                               std::size_t k) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                cand.emplace_back(geo_distance(points[i], points[j]), j);
            }
        }
        const auto take = std::min(k, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
        for (std::size_t t = 0; t < take; ++t) {
            out[i].push_back(cand[t].second);
        }
    }
    return out;
}

inline Graph knn_graph(const std::vector<GeoPoint>& points, const KnnGraphConfig& cfg) {
    require(cfg.k >= 1, "k must be at least 1");
    require(cfg.sigma_km > 0.0, "sigma must be positive");
    if (points.size() < cfg.k + 1) {
        fail(ErrorKind::invalid_argument, "k-NN graph with k=" + std::to_string(cfg.k) +
                                              " needs at least " + std::to_string(cfg.k + 1) +
                                              " points, got " + std::to_string(points.size()));
    }
    for (const auto& p : points) {
        validate(p);
    }
    const std::size_t n = points.size();
    const auto nbrs = nearest_neighbors(points, cfg.k);

    // directed relation as a sorted list of (min, max, count)
    std::vector<std::pair<std::size_t, std::size_t>> directed;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto j : nbrs[i]) {
            directed.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(directed.begin(), directed.end());

    std::vector<Edge> edges;
    for (std::size_t a = 0; a < directed.size();) {
        std::size_t b = a;
        while (b < directed.size() && directed[b] == directed[a]) {
            ++b;
        }
        const bool mutual = (b - a) >= 2;
        if (cfg.union_symmetrization || mutual) {
            const auto [i, j] = directed[a];
            edges.push_back({i, j, gaussian_weight(geo_distance(points[i], points[j]), cfg.sigma_km)});
        }
        a = b;
    }
    return Graph(n, std::move(edges));
}

/// Number of point pairs sharing identical coordinates (these get weight 1).
inline std::size_t coincident_pairs(const std::vector<GeoPoint>& points) {
    std::vector<GeoPoint> sorted = points;
    const auto key = [](const GeoPoint& p) {
        return std::tuple(p.latitude, p.longitude, p.altitude_km);
    };
    std::sort(sorted.begin(), sorted.end(),
              [&](const GeoPoint& a, const GeoPoint& b) { return key(a) < key(b); });
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < sorted.size();) {
        std::size_t b = a + 1;
        while (b < sorted.size() && sorted[b] == sorted[a]) {
            ++b;
        }
        pairs += (b - a) * (b - a - 1) / 2;
        a = b;
    }
    return pairs;
}

} // namespace gsrcv
