#pragma once

/**
 * @file graph.hpp
 * @brief Weighted undirected graphs, the combinatorial Laplacian and its
 * eigendecomposition.
 *
 * Every downstream operation indexes arbitrary submatrices of the full
 * eigenvector matrix, so the decomposition is dense.
 */

#include "error.hpp"
#include "format.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gsrcv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
    std::size_t i;
    std::size_t j;
    double weight;
};

/// Simple weighted undirected graph. Edges are stored once with i < j,
/// sorted, so two graphs built from the same edge set in any order compare
/// equal.
class Graph {
public:
    Graph() = default;

    Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        for (auto& e : edges_) {
            require(e.i < n_ && e.j < n_,
                    "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                        ") out of range for n=" + std::to_string(n_));
            require(e.i != e.j, "self-loop at vertex " + std::to_string(e.i));
            require(std::isfinite(e.weight) && e.weight > 0.0,
                    "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                        ") must have a finite positive weight");
            if (e.i > e.j) {
                std::swap(e.i, e.j);
            }
        }
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return std::pair(a.i, a.j) < std::pair(b.i, b.j);
        });
        for (std::size_t k = 1; k < edges_.size(); ++k) {
            require(edges_[k].i != edges_[k - 1].i || edges_[k].j != edges_[k - 1].j,
                    "duplicate edge (" + std::to_string(edges_[k].i) + ", " +
                        std::to_string(edges_[k].j) + ")");
        }
    }

    std::size_t size() const noexcept { return n_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    Matrix adjacency() const {
        Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        for (const auto& e : edges_) {
            const auto i = static_cast<Eigen::Index>(e.i);
            const auto j = static_cast<Eigen::Index>(e.j);
            a(i, j) = e.weight;
            a(j, i) = e.weight;
        }
        return a;
    }

    std::vector<double> degrees() const {
        std::vector<double> d(n_, 0.0);
        for (const auto& e : edges_) {
            d[e.i] += e.weight;
            d[e.j] += e.weight;
        }
        return d;
    }

    /// Number of incident edges per vertex (ignores weights).
    std::vector<std::size_t> neighbor_counts() const {
        std::vector<std::size_t> c(n_, 0);
        for (const auto& e : edges_) {
            ++c[e.i];
            ++c[e.j];
        }
        return c;
    }

    bool has_edge(std::size_t i, std::size_t j) const {
        if (i > j) {
            std::swap(i, j);
        }
        return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j, 0.0},
                                  [](const Edge& a, const Edge& b) {
                                      return std::pair(a.i, a.j) < std::pair(b.i, b.j);
                                  });
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.n_ == b.n_ &&
               std::equal(a.edges_.begin(), a.edges_.end(), b.edges_.begin(), b.edges_.end(),
                          [](const Edge& x, const Edge& y) {
                              return x.i == y.i && x.j == y.j && x.weight == y.weight;
                          });
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
};

/// Sorted, duplicate-free list of indices. Used for vertex subsets
/// (known set, folds) and for spectral index sets.
class VertexSet {
public:
    VertexSet() = default;

    explicit VertexSet(std::vector<std::size_t> ids) : ids_(std::move(ids)) {
        std::sort(ids_.begin(), ids_.end());
        require(std::adjacent_find(ids_.begin(), ids_.end()) == ids_.end(),
                "vertex set contains duplicates");
    }

    static VertexSet all(std::size_t n) { return range(0, n); }

    /// Indices in [first, last).
    static VertexSet range(std::size_t first, std::size_t last) {
        VertexSet s;
        if (last > first) {
            s.ids_.resize(last - first);
            std::iota(s.ids_.begin(), s.ids_.end(), first);
        }
        return s;
    }

    VertexSet complement(std::size_t n) const {
        check_bounds(n);
        VertexSet out;
        out.ids_.reserve(n - ids_.size());
        std::size_t k = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (k < ids_.size() && ids_[k] == v) {
                ++k;
            } else {
                out.ids_.push_back(v);
            }
        }
        return out;
    }

    /// Members of this set not in `other`.
    VertexSet minus(const VertexSet& other) const {
        VertexSet out;
        std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                            std::back_inserter(out.ids_));
        return out;
    }

    void check_bounds(std::size_t n) const {
        if (!ids_.empty() && ids_.back() >= n) {
            fail(ErrorKind::invalid_argument, "index " + std::to_string(ids_.back()) +
                                                  " out of range for size " + std::to_string(n));
        }
    }

    bool contains(std::size_t v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t operator[](std::size_t k) const { return ids_[k]; }
    auto begin() const noexcept { return ids_.begin(); }
    auto end() const noexcept { return ids_.end(); }
    const std::vector<std::size_t>& ids() const noexcept { return ids_; }

    friend bool operator==(const VertexSet&, const VertexSet&) = default;

private:
    std::vector<std::size_t> ids_;
};

/// L = D - A.
inline Matrix laplacian(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.size());
    Matrix l = Matrix::Zero(n, n);
    for (const auto& e : g.edges()) {
        const auto i = static_cast<Eigen::Index>(e.i);
        const auto j = static_cast<Eigen::Index>(e.j);
        l(i, j) -= e.weight;
        l(j, i) -= e.weight;
        l(i, i) += e.weight;
        l(j, j) += e.weight;
    }
    return l;
}

/// Connected component count by union-find.
inline std::size_t connected_components(const Graph& g) {
    std::vector<std::size_t> parent(g.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    std::size_t components = g.size();
    for (const auto& e : g.edges()) {
        const auto a = find(e.i);
        const auto b = find(e.j);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
            --components;
        }
    }
    return components;
}

/// Eigenvalues of the Laplacian in ascending order with the matching
/// orthonormal eigenvectors as columns. Column k is frequency k (0-based).
class SpectralBasis {
public:
    SpectralBasis(Vector eigenvalues, Matrix eigenvectors)
        : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
        require(eigenvectors_.rows() == eigenvectors_.cols() &&
                    eigenvectors_.cols() == eigenvalues_.size(),
                "spectral basis dimensions disagree");
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    const Matrix& eigenvectors() const noexcept { return eigenvectors_; }

    double eigenvalue(std::size_t k) const { return eigenvalues_(static_cast<Eigen::Index>(k)); }

    std::size_t zero_eigenvalue_count(double threshold = 1e-8) const {
        return static_cast<std::size_t>((eigenvalues_.array().abs() < threshold).count());
    }

    /// True when keeping the first `r` frequencies splits a cluster of
    /// (numerically) repeated eigenvalues.
    bool splits_multiplicity(std::size_t r, double gap = 1e-9) const {
        if (r == 0 || r >= size()) {
            return false;
        }
        return eigenvalue(r) - eigenvalue(r - 1) < gap;
    }

private:
    Vector eigenvalues_;
    Matrix eigenvectors_;
};

namespace detail {

inline void apply_sign_convention(Matrix& u, double tol = 1e-9) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
            if (std::abs(u(r, c)) > tol) {
                if (u(r, c) < 0.0) {
                    u.col(c) = -u.col(c);
                }
                break;
            }
        }
    }
}

// Lexicographic order on entries rounded to 1e-8, used inside clusters of
// repeated eigenvalues.
inline bool rounded_less(const Matrix& u, Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
        const auto x = std::llround(u(r, a) * 1e8);
        const auto y = std::llround(u(r, b) * 1e8);
        if (x != y) {
            return x < y;
        }
    }
    return false;
}

inline void order_multiplicity_clusters(const Vector& lambda, Matrix& u, double gap = 1e-9) {
    const Eigen::Index n = lambda.size();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && lambda(stop) - lambda(stop - 1) < gap) {
            ++stop;
        }
        if (stop - start > 1) {
            std::vector<Eigen::Index> cols(static_cast<std::size_t>(stop - start));
            std::iota(cols.begin(), cols.end(), start);
            std::stable_sort(cols.begin(), cols.end(),
                             [&](Eigen::Index a, Eigen::Index b) { return rounded_less(u, a, b); });
            Matrix block = u.middleCols(start, stop - start);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                block.col(static_cast<Eigen::Index>(k)) = u.col(cols[k]);
            }
            u.middleCols(start, stop - start) = block;
        }
        start = stop;
    }
}

} // namespace detail

/// Dense symmetric eigendecomposition of a Laplacian matrix.
inline SpectralBasis spectral_decompose(const Matrix& l) {
    require(l.rows() == l.cols(), "Laplacian must be square");
    if (l.rows() == 0) {
        return SpectralBasis(Vector(), Matrix());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(l);
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::numerical, "eigendecomposition did not converge for a graph with " +
                                       std::to_string(l.rows()) + " vertices");
    }
    Vector lambda = solver.eigenvalues();
    Matrix u = solver.eigenvectors();
    detail::apply_sign_convention(u);
    detail::order_multiplicity_clusters(lambda, u);
    return SpectralBasis(std::move(lambda), std::move(u));
}

inline SpectralBasis spectral_decompose(const Graph& g) { return spectral_decompose(laplacian(g)); }

/// A_XY: rows indexed by `rows`, columns by `cols`.
inline Matrix submatrix(const Matrix& a, const VertexSet& rows, const VertexSet& cols) {
    rows.check_bounds(static_cast<std::size_t>(a.rows()));
    cols.check_bounds(static_cast<std::size_t>(a.cols()));
    return a(rows.ids(), cols.ids());
}

/// Entries of `x` at the given indices.
inline Vector restrict(const Vector& x, const VertexSet& idx) {
    idx.check_bounds(static_cast<std::size_t>(x.size()));
    return x(idx.ids());
}

// --- edge-list text format --------------------------------------------------
//
//   # comment
//   n=<count>
//   i j w
//

inline void write_edge_list(std::ostream& out, const Graph& g) {
    out << "n=" << g.size() << '\n';
    for (const auto& e : g.edges()) {
        out << e.i << ' ' << e.j << ' ' << format_double(e.weight) << '\n';
    }
}

inline Graph read_edge_list(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> n;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto where = "edge list line " + std::to_string(line_no);
        if (!n) {
            if (body.substr(0, 2) != "n=") {
                fail(ErrorKind::parse, where + ": expected header 'n=<count>'");
            }
            n = parse_uint(body.substr(2));
            if (!n) {
                fail(ErrorKind::parse, where + ": bad vertex count");
            }
            continue;
        }
        std::istringstream fields{std::string(body)};
        std::string si, sj, sw, extra;
        if (!(fields >> si >> sj >> sw) || (fields >> extra)) {
            fail(ErrorKind::parse, where + ": expected 'i j w'");
        }
        const auto i = parse_uint(si);
        const auto j = parse_uint(sj);
        const auto w = parse_double(sw);
        if (!i || !j || !w) {
            fail(ErrorKind::parse, where + ": non-numeric field");
        }
        edges.push_back({static_cast<std::size_t>(*i), static_cast<std::size_t>(*j), *w});
    }
    if (!n) {
        fail(ErrorKind::parse, "edge list has no 'n=<count>' header");
    }
    try {
        return Graph(*n, std::move(edges));
    } catch (const Error& e) {
        fail(ErrorKind::parse, std::string("invalid edge list: ") + e.what());
    }
}

/// Fingerprint of the canonical edge-list serialization.
inline std::string graph_hash(const Graph& g) {
    std::ostringstream s;
    write_edge_list(s, g);
    Fnv1a h;
    h.update(s.str());
    return h.hex();
}

} // namespace gsrcv
