#pragma once

// Known-set selection and repeated K-fold partitions of the known set.

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsrcv {

enum class SamplingStrategy { random, greedy_dopt };

inline std::string_view to_string(SamplingStrategy s) {
    return s == SamplingStrategy::random ? "random" : "greedy-dopt";
}

inline std::optional<SamplingStrategy> parse_sampling_strategy(std::string_view s) {
    if (s == "random") {
        return SamplingStrategy::random;
    }
    if (s == "greedy-dopt") {
        return SamplingStrategy::greedy_dopt;
    }
    return std::nullopt;
}

struct SamplingOptions {
    SamplingStrategy strategy = SamplingStrategy::random;
    std::uint64_t seed = 0;
    /// Bandwidth used by greedy-dopt; defaults to max(1, m / 2).
    std::optional<std::size_t> reference_bandwidth;
    /// Ridge added to U_SR^T U_SR so the log-determinant is finite.
    double ridge = 1e-8;
};

struct KnownSetSelection {
    VertexSet vertices;
    SamplingStrategy strategy = SamplingStrategy::random;
    std::size_t reference_bandwidth = 0;
    std::vector<std::string> warnings;
};

/// log det(U_SR^T U_SR + ridge I) for the first r frequencies.
inline double dopt_log_det(const SpectralBasis& basis, const VertexSet& s, std::size_t r,
                           double ridge) {
    const Matrix a = submatrix(basis.eigenvectors(), s, VertexSet::range(0, r));
    Matrix g = a.transpose() * a;
    g.diagonal().array() += ridge;
    const Eigen::LLT<Matrix> llt(g);
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

namespace detail {

inline VertexSet random_subset(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = i;
    }
    Rng rng(seed);
    // partial Fisher-Yates: the first m slots end up a uniform m-subset
    for (std::size_t i = 0; i < m; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(m);
    return VertexSet(std::move(ids));
}

// Adds one vertex at a time, maximizing the increase of
// log det(G + u u^T) = log det G + log(1 + u^T G^-1 u), G = U_SR^T U_SR + ridge I.
inline VertexSet greedy_dopt(const SpectralBasis& basis, std::size_t m, std::size_t r, double ridge) {
    const std::size_t n = basis.size();
    const auto ri = static_cast<Eigen::Index>(r);
    const Matrix rows = basis.eigenvectors().leftCols(ri).transpose();  // r x n, column v = u_v
    Matrix gram = Matrix::Identity(ri, ri) * ridge;
    std::vector<bool> chosen(n, false);
    std::vector<std::size_t> picked;
    picked.reserve(m);
    for (std::size_t step = 0; step < m; ++step) {
        const Eigen::LLT<Matrix> llt(gram);
        const Matrix solved = llt.solve(rows);
        std::size_t best = n;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v) {
            if (chosen[v]) {
                continue;
            }
            const auto vi = static_cast<Eigen::Index>(v);
            const double gain = std::log1p(rows.col(vi).dot(solved.col(vi)));
            // near-ties go to the lower index
            if (best == n || gain > best_gain + 1e-12 * std::max(1.0, std::abs(best_gain))) {
                best_gain = gain;
                best = v;
            }
        }
        if (best == n || !std::isfinite(best_gain)) {
            fail(ErrorKind::numerical, "greedy-dopt: non-finite information gain at step " +
                                           std::to_string(step));
        }
        chosen[best] = true;
        picked.push_back(best);
        const auto bi = static_cast<Eigen::Index>(best);
        gram.noalias() += rows.col(bi) * rows.col(bi).transpose();
    }
    return VertexSet(std::move(picked));
}

} // namespace detail

/// Chooses m vertices whose values are treated as known.
inline KnownSetSelection select_known_set(const SpectralBasis& basis, std::size_t m,
                                          const SamplingOptions& opts = {}) {
    const std::size_t n = basis.size();
    if (m > n) {
        fail(ErrorKind::invalid_argument,
             "cannot sample " + std::to_string(m) + " vertices from a graph with " +
                 std::to_string(n));
    }
    require(m >= 1, "sample count must be at least 1");
    KnownSetSelection out;
    out.strategy = opts.strategy;
    out.reference_bandwidth = opts.reference_bandwidth.value_or(std::max<std::size_t>(1, m / 2));
    require(out.reference_bandwidth >= 1 && out.reference_bandwidth <= n,
            "reference bandwidth outside [1, n]");

    if (m == n) {
        out.vertices = VertexSet::all(n);
        return out;
    }
    switch (opts.strategy) {
    case SamplingStrategy::random:
        out.vertices = detail::random_subset(n, m, opts.seed);
        break;
    case SamplingStrategy::greedy_dopt:
        if (m <= out.reference_bandwidth) {
            out.warnings.push_back("greedy-dopt: sample count " + std::to_string(m) +
                                   " does not exceed reference bandwidth " +
                                   std::to_string(out.reference_bandwidth) +
                                   "; the design matrix cannot reach full column rank");
        }
        out.vertices = detail::greedy_dopt(basis, m, out.reference_bandwidth, opts.ridge);
        break;
    }
    return out;
}

// --- fold plans ---------------------------------------------------------------

struct Fold {
    std::size_t repeat = 0;
    std::size_t index = 0;  ///< fold number within the repeat
    VertexSet train;        ///< S_i
    VertexSet holdout;      ///< S_i^c (relative to S)
};

/// Repeated K-fold split of the known set S. Within each repeat the holdout
/// sets partition S, and every training set is non-empty.
class FoldPlan {
public:
    /// Builds a plan from explicit holdout sets, one list per repeat.
    static FoldPlan from_holdouts(VertexSet known,
                                  const std::vector<std::vector<VertexSet>>& holdouts,
                                  std::uint64_t seed = 0) {
        require(!holdouts.empty(), "fold plan needs at least one repeat");
        FoldPlan plan;
        plan.known_ = std::move(known);
        plan.k_ = holdouts.front().size();
        plan.repeats_ = holdouts.size();
        plan.seed_ = seed;
        require(plan.k_ >= 1, "fold plan needs at least one fold per repeat");
        for (std::size_t rep = 0; rep < holdouts.size(); ++rep) {
            require(holdouts[rep].size() == plan.k_,
                    "every repeat must have " + std::to_string(plan.k_) + " folds");
            std::vector<std::size_t> seen;
            for (std::size_t f = 0; f < plan.k_; ++f) {
                const VertexSet& h = holdouts[rep][f];
                require(!h.empty(), "empty holdout set in repeat " + std::to_string(rep));
                seen.insert(seen.end(), h.begin(), h.end());
                Fold fold{rep, f, plan.known_.minus(h), h};
                require(fold.train.size() + h.size() == plan.known_.size(),
                        "holdout set is not a subset of the known set (repeat " +
                            std::to_string(rep) + ", fold " + std::to_string(f) + ")");
                require(!fold.train.empty(), "fold leaves an empty training set");
                plan.folds_.push_back(std::move(fold));
            }
            std::sort(seen.begin(), seen.end());
            require(seen == plan.known_.ids(),
                    "holdouts of repeat " + std::to_string(rep) + " do not partition the known set");
        }
        return plan;
    }

    const VertexSet& known() const noexcept { return known_; }
    const std::vector<Fold>& folds() const noexcept { return folds_; }
    std::size_t folds_per_repeat() const noexcept { return k_; }
    std::size_t repeats() const noexcept { return repeats_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Smallest training set over all folds.
    std::size_t min_train_size() const {
        std::size_t m = std::numeric_limits<std::size_t>::max();
        for (const auto& f : folds_) {
            m = std::min(m, f.train.size());
        }
        return m;
    }

    double mean_holdout_size() const {
        double total = 0.0;
        for (const auto& f : folds_) {
            total += static_cast<double>(f.holdout.size());
        }
        return folds_.empty() ? 0.0 : total / static_cast<double>(folds_.size());
    }

    /// Holdout sizes within each repeat differ by at most one.
    bool balanced() const {
        for (std::size_t rep = 0; rep < repeats_; ++rep) {
            std::size_t lo = std::numeric_limits<std::size_t>::max();
            std::size_t hi = 0;
            for (std::size_t f = 0; f < k_; ++f) {
                const auto s = folds_[rep * k_ + f].holdout.size();
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            if (hi - lo > 1) {
                return false;
            }
        }
        return true;
    }

private:
    VertexSet known_;
    std::vector<Fold> folds_;
    std::size_t k_ = 0;
    std::size_t repeats_ = 0;
    std::uint64_t seed_ = 0;
};

/// Shuffles S once per repeat and cuts it into k holdouts; the first
/// |S| mod k holdouts get one extra vertex.
inline FoldPlan make_folds(const VertexSet& known, std::size_t k, std::size_t repeats,
                           std::uint64_t seed) {
    require(k >= 2, "need at least 2 folds, got " + std::to_string(k));
    require(repeats >= 1, "need at least 1 repeat");
    if (k > known.size()) {
        fail(ErrorKind::invalid_argument, std::to_string(k) + " folds requested for a known set of " +
                                              std::to_string(known.size()) + " vertices");
    }
    std::vector<std::vector<VertexSet>> holdouts(repeats);
    const std::size_t base = known.size() / k;
    const std::size_t extra = known.size() % k;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        std::vector<std::size_t> order = known.ids();
        Rng rng(mix_seed(seed, rep));
        rng.shuffle(std::span<std::size_t>(order));
        std::size_t pos = 0;
        for (std::size_t f = 0; f < k; ++f) {
            const std::size_t len = base + (f < extra ? 1 : 0);
            holdouts[rep].emplace_back(std::vector<std::size_t>(
                order.begin() + static_cast<std::ptrdiff_t>(pos),
                order.begin() + static_cast<std::ptrdiff_t>(pos + len)));
            pos += len;
        }
    }
    return FoldPlan::from_holdouts(known, holdouts, seed);
}

/// One row per (repeat, fold, vertex): `repeat,fold,vertex,role`.
inline void write_fold_plan_csv(std::ostream& out, const FoldPlan& plan) {
    out << "repeat,fold,vertex,role\n";
    for (const auto& f : plan.folds()) {
        for (const auto v : plan.known()) {
            out << f.repeat << ',' << f.index << ',' << v << ','
                << (f.holdout.contains(v) ? "holdout" : "train") << '\n';
        }
    }
}

} // namespace gsrcv
