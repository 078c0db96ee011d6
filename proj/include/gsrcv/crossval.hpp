#pragma once

/**
 * @file crossval.hpp
 * @brief Cross-validation estimates of the reconstruction error on S^c as a
 * function of the bandwidth.
 *
 * Each fold (S_i, S_i^c) of the known set gives a holdout residual
 * e_i = e(S_i^c) = M_i beta. The naive estimate averages ||e_i||^2 over folds.
 * A fold whose training set is poorly connected to its holdout set has an
 * error operator M_i with large singular values, and its residual then
 * dominates the naive average.
 *
 * The weighted estimate first takes the SVD M_i = V_i Sigma_i W_i^T and
 * replaces e_i by Sigma_i' V_i^T e_i, where Sigma_i' is diagonal with 1/sigma
 * for every sigma >= 1 and 1 otherwise. The composite operator
 * Sigma_i' V_i^T M_i then has singular values min(sigma, 1): no fold can
 * amplify beta.
 */

#include "error.hpp"
#include "format.hpp"
#include "graph.hpp"
#include "reconstruct.hpp"
#include "sampling.hpp"
#include "signals.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gsrcv {

struct CrossValOptions {
    LeastSquaresOptions least_squares;
    /// Singular values of M_i at or above this are scaled down to it.
    double clip_threshold = 1.0;
};

enum class EstimatorMode { naive, weighted };

struct FoldError {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    Vector raw_error;       ///< e(S_i^c), ordered like the holdout set
    Vector weighted_error;  ///< Sigma_i' V_i^T e(S_i^c)
    /// ||V_i^T e||^2 and ||Sigma_i' V_i^T e||^2, accumulated in the same
    /// order so that weighted <= raw holds exactly in floating point.
    double raw_squared_norm = 0.0;
    double weighted_squared_norm = 0.0;
    Vector singular_values;  ///< of M_i, descending
    Matrix left_singular_vectors;  ///< V_i, |S_i^c| x |S_i^c|
    double sigma_max = 0.0;
    std::size_t clipped_count = 0;
    double condition_number = 1.0;  ///< of U_{S_i R}
    bool rank_deficient = false;
};

namespace detail {

inline void check_fold_signal(const Fold& fold, const Vector& x) {
    for (const auto* set : {&fold.train, &fold.holdout}) {
        set->check_bounds(static_cast<std::size_t>(x.size()));
        for (const auto v : *set) {
            require(std::isfinite(x(static_cast<Eigen::Index>(v))),
                    "signal has no value at fold vertex " + std::to_string(v));
        }
    }
}

} // namespace detail

struct ClippedError {
    Vector weighted;                ///< Sigma' V^T e
    Vector singular_values;         ///< of the operator, descending
    Matrix left_singular_vectors;   ///< V, square
    std::size_t clipped_count = 0;  ///< singular values >= threshold
    double raw_squared_norm = 0.0;       ///< ||V^T e||^2
    double weighted_squared_norm = 0.0;  ///< ||Sigma' V^T e||^2
};

/// Reweights a residual e = M beta so that the composite operator
/// Sigma' V^T M has singular values min(sigma, threshold). Diagonal
/// positions of Sigma' past the number of singular values are 1.
inline ClippedError clip_error(const Matrix& m, const Vector& e, double threshold = 1.0) {
    require(threshold > 0.0, "clip threshold must be positive");
    require(e.size() == m.rows(), "residual length does not match operator rows");
    ClippedError out;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    out.singular_values = svd.singularValues();
    out.left_singular_vectors = svd.matrixU();

    const Eigen::Index h = m.rows();
    Vector weights = Vector::Ones(h);
    for (Eigen::Index j = 0; j < out.singular_values.size(); ++j) {
        const double s = out.singular_values(j);
        if (s >= threshold) {
            weights(j) = threshold / s;
            ++out.clipped_count;
        }
    }
    const Vector coords = out.left_singular_vectors.transpose() * e;
    out.weighted.resize(h);
    for (Eigen::Index j = 0; j < h; ++j) {
        out.weighted(j) = weights(j) * coords(j);
        out.raw_squared_norm += coords(j) * coords(j);
        out.weighted_squared_norm += out.weighted(j) * out.weighted(j);
    }
    return out;
}

/// Holdout residual e(S_i^c) from a fit on S_i. `x` is the full-length signal;
/// only entries on the fold's vertices are read.
inline Vector fold_error_naive(const SpectralBasis& basis, const Fold& fold, const Vector& x,
                               std::size_t r, const CrossValOptions& opts = {}) {
    detail::check_fold_signal(fold, x);
    return holdout_residual(basis, fold.train, fold.holdout, x, r, opts.least_squares);
}

inline FoldError fold_error_weighted(const SpectralBasis& basis, const Fold& fold, const Vector& x,
                                     std::size_t r, const CrossValOptions& opts = {}) {
    detail::check_fold_signal(fold, x);
    require(opts.clip_threshold > 0.0, "clip threshold must be positive");

    const std::size_t n = basis.size();
    const BandlimitedFit fit = fit_bandlimited(basis, fold.train, r, opts.least_squares);
    const Matrix& u = basis.eigenvectors();
    const VertexSet in_band = VertexSet::range(0, r);
    const VertexSet out_band = VertexSet::range(r, n);
    const Matrix lift = submatrix(u, fold.holdout, in_band) * fit.pinv;  // |H| x |T|

    FoldError out;
    out.repeat = fold.repeat;
    out.fold = fold.index;
    out.condition_number = fit.condition_number;
    out.rank_deficient = fit.rank_deficient();
    out.raw_error = restrict(x, fold.holdout) - lift * restrict(x, fold.train);

    const Matrix m = submatrix(u, fold.holdout, out_band) - lift * submatrix(u, fold.train, out_band);
    ClippedError clipped = clip_error(m, out.raw_error, opts.clip_threshold);
    out.weighted_error = std::move(clipped.weighted);
    out.raw_squared_norm = clipped.raw_squared_norm;
    out.weighted_squared_norm = clipped.weighted_squared_norm;
    out.singular_values = std::move(clipped.singular_values);
    out.left_singular_vectors = std::move(clipped.left_singular_vectors);
    out.sigma_max = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
    out.clipped_count = clipped.clipped_count;
    return out;
}

struct CrossValEstimate {
    double value = 0.0;  ///< mean squared fold-error norm over usable folds
    std::size_t used_folds = 0;
    std::size_t skipped_folds = 0;
};

/// Averages squared fold-error norms over every fold whose training set is
/// larger than r. Folds that cannot be fitted are excluded from both the sum
/// and the count.
inline CrossValEstimate estimate_error(const SpectralBasis& basis, const FoldPlan& plan,
                                       const Vector& x, std::size_t r, EstimatorMode mode,
                                       const CrossValOptions& opts = {}) {
    CrossValEstimate est;
    double total = 0.0;
    for (const auto& fold : plan.folds()) {
        if (r >= fold.train.size()) {
            ++est.skipped_folds;
            continue;
        }
        try {
            const FoldError fe = fold_error_weighted(basis, fold, x, r, opts);
            total += mode == EstimatorMode::naive ? fe.raw_squared_norm : fe.weighted_squared_norm;
            ++est.used_folds;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::numerical) {
                throw;
            }
            ++est.skipped_folds;
        }
    }
    if (est.used_folds == 0) {
        fail(ErrorKind::numerical,
             "no usable cross-validation folds at bandwidth " + std::to_string(r));
    }
    est.value = total / static_cast<double>(est.used_folds);
    return est;
}

// --- bandwidth sweep ------------------------------------------------------------

struct SweepRow {
    std::size_t bandwidth = 0;
    std::optional<double> actual;  ///< ||x_Sc - x_hat_Sc||^2, with ground truth
    double naive = 0.0;
    double weighted = 0.0;
    std::optional<double> actual_normalized;  ///< actual / |S^c|
    double naive_normalized = 0.0;            ///< naive / mean |S_i^c|
    double weighted_normalized = 0.0;
    double mean_kappa = 0.0;  ///< condition number of U_{S_i R}, over folds
    double max_kappa = 0.0;
    double clipped_fraction = 0.0;  ///< clipped / total singular values of M_i
    std::size_t used_folds = 0;
    std::size_t skipped_folds = 0;
    bool splits_multiplicity = false;  ///< lambda_r ~ lambda_{r+1}
};

struct SkippedBandwidth {
    std::size_t bandwidth = 0;
    std::string reason;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SkippedBandwidth> skipped;
    std::vector<std::pair<std::string, std::string>> metadata;

    std::size_t argmin_weighted() const { return argmin([](const SweepRow& r) { return r.weighted; }); }
    std::size_t argmin_naive() const { return argmin([](const SweepRow& r) { return r.naive; }); }

    std::optional<std::size_t> argmin_actual() const {
        if (rows.empty() || !rows.front().actual) {
            return std::nullopt;
        }
        return argmin([](const SweepRow& r) { return *r.actual; });
    }

    const SweepRow& row(std::size_t bandwidth) const {
        for (const auto& r : rows) {
            if (r.bandwidth == bandwidth) {
                return r;
            }
        }
        fail(ErrorKind::invalid_argument, "bandwidth " + std::to_string(bandwidth) + " not in sweep");
    }

private:
    // bandwidth of the smallest value; ties go to the smaller bandwidth
    template <typename F>
    std::size_t argmin(F value) const {
        require(!rows.empty(), "empty sweep");
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (value(rows[i]) < value(rows[best])) {
                best = i;
            }
        }
        return rows[best].bandwidth;
    }
};

/// Runs both estimators (and the actual error when every vertex of `signal`
/// carries a value) for each bandwidth. The plan must be built on
/// signal.known. Bandwidths that no fold can support are reported in
/// `skipped` instead of `rows`.
inline SweepResult sweep(const SpectralBasis& basis, const GraphSignal& signal,
                         const std::vector<std::size_t>& bandwidths, const FoldPlan& plan,
                         const CrossValOptions& opts = {}) {
    require(signal.size() == basis.size(), "signal length does not match graph size");
    require(plan.known() == signal.known, "fold plan was built on a different known set");
    require(!bandwidths.empty(), "no bandwidths to sweep");
    for (std::size_t i = 1; i < bandwidths.size(); ++i) {
        require(bandwidths[i] > bandwidths[i - 1], "sweep bandwidths must be strictly increasing");
    }

    const bool with_truth = signal.has_ground_truth();
    const VertexSet unknown = signal.unknown();
    const Vector known_values = signal.known_values();
    const std::size_t min_train = plan.min_train_size();

    SweepResult out;
    for (const auto r : bandwidths) {
        if (r == 0) {
            out.skipped.push_back({r, "bandwidth must be at least 1"});
            continue;
        }
        if (r >= min_train) {
            out.skipped.push_back({r, "bandwidth not below smallest training set (" +
                                          std::to_string(min_train) + ")"});
            continue;
        }
        SweepRow row;
        row.bandwidth = r;
        row.splits_multiplicity = basis.splits_multiplicity(r);

        if (with_truth) {
            const auto rec = reconstruct_ls(basis, signal.known, known_values, r, opts.least_squares);
            const double e = (restrict(signal.values, unknown) - rec.estimate).squaredNorm();
            row.actual = e;
            row.actual_normalized = unknown.empty() ? 0.0 : e / static_cast<double>(unknown.size());
        }

        double naive_sum = 0.0;
        double weighted_sum = 0.0;
        double kappa_sum = 0.0;
        double holdout_sum = 0.0;
        std::size_t clipped = 0;
        std::size_t singular_total = 0;
        for (const auto& fold : plan.folds()) {
            FoldError fe;
            try {
                fe = fold_error_weighted(basis, fold, signal.values, r, opts);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::numerical) {
                    throw;
                }
                ++row.skipped_folds;
                continue;
            }
            ++row.used_folds;
            naive_sum += fe.raw_squared_norm;
            weighted_sum += fe.weighted_squared_norm;
            kappa_sum += fe.condition_number;
            row.max_kappa = std::max(row.max_kappa, fe.condition_number);
            holdout_sum += static_cast<double>(fold.holdout.size());
            clipped += fe.clipped_count;
            singular_total += static_cast<std::size_t>(fe.singular_values.size());
        }
        if (row.used_folds == 0) {
            out.skipped.push_back({r, "no fold could be fitted"});
            continue;
        }
        const auto used = static_cast<double>(row.used_folds);
        row.naive = naive_sum / used;
        row.weighted = weighted_sum / used;
        const double mean_holdout = holdout_sum / used;
        row.naive_normalized = row.naive / mean_holdout;
        row.weighted_normalized = row.weighted / mean_holdout;
        row.mean_kappa = kappa_sum / used;
        row.clipped_fraction =
            singular_total == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(singular_total);
        out.rows.push_back(std::move(row));
    }
    if (out.rows.empty()) {
        fail(ErrorKind::numerical, "no usable bandwidth in the sweep");
    }
    return out;
}

// --- sweep CSV ------------------------------------------------------------------
//
// `# key=value` metadata lines, then
//   r,actual,naive,weighted,mean_kappa,max_kappa,clipped_frac,skipped_folds,
//   actual_normalized,naive_normalized,weighted_normalized
// The actual columns read `nan` when no ground truth was available.

inline constexpr std::string_view sweep_csv_header =
    "r,actual,naive,weighted,mean_kappa,max_kappa,clipped_frac,skipped_folds,"
    "actual_normalized,naive_normalized,weighted_normalized";

inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    for (const auto& [key, value] : result.metadata) {
        out << "# " << key << '=' << value << '\n';
    }
    for (const auto& s : result.skipped) {
        out << "# skipped_bandwidth=" << s.bandwidth << ": " << s.reason << '\n';
    }
    std::string cuts;
    for (const auto& row : result.rows) {
        if (row.splits_multiplicity) {
            cuts += (cuts.empty() ? "" : ",") + std::to_string(row.bandwidth);
        }
    }
    if (!cuts.empty()) {
        out << "# multiplicity_split_at=" << cuts << '\n';
    }
    out << "# argmin_weighted=" << result.argmin_weighted() << '\n';
    out << "# argmin_naive=" << result.argmin_naive() << '\n';
    if (const auto a = result.argmin_actual()) {
        out << "# argmin_actual=" << *a << '\n';
    }
    const auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string("nan");
    };
    out << sweep_csv_header << '\n';
    for (const auto& row : result.rows) {
        out << row.bandwidth << ',' << opt(row.actual) << ',' << format_double(row.naive) << ','
            << format_double(row.weighted) << ',' << format_double(row.mean_kappa) << ','
            << format_double(row.max_kappa) << ',' << format_double(row.clipped_fraction) << ','
            << row.skipped_folds << ',' << opt(row.actual_normalized) << ','
            << format_double(row.naive_normalized) << ',' << format_double(row.weighted_normalized)
            << '\n';
    }
}

/// Reads the data rows and metadata back. Skipped-bandwidth and argmin
/// lines are kept as plain metadata.
inline SweepResult read_sweep_csv(std::istream& in) {
    SweepResult result;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) {
            continue;
        }
        if (body.front() == '#') {
            const auto kv = trim(body.substr(1));
            const auto eq = kv.find('=');
            if (eq != std::string_view::npos) {
                result.metadata.emplace_back(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
            }
            continue;
        }
        const auto where = "sweep csv line " + std::to_string(line_no);
        if (!header) {
            if (body != sweep_csv_header) {
                fail(ErrorKind::parse, where + ": unexpected header");
            }
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ss{std::string(body)};
        for (std::string cell; std::getline(ss, cell, ',');) {
            f.push_back(cell);
        }
        if (f.size() != 11) {
            fail(ErrorKind::parse, where + ": expected 11 fields");
        }
        const auto num = [&](const std::string& s) {
            const auto v = parse_double(s);
            if (!v) {
                fail(ErrorKind::parse, where + ": bad number '" + s + "'");
            }
            return *v;
        };
        const auto opt = [&](const std::string& s) -> std::optional<double> {
            if (trim(s) == "nan") {
                return std::nullopt;
            }
            return num(s);
        };
        SweepRow row;
        const auto r = parse_uint(f[0]);
        const auto skipped = parse_uint(f[7]);
        if (!r || !skipped) {
            fail(ErrorKind::parse, where + ": bad integer field");
        }
        row.bandwidth = static_cast<std::size_t>(*r);
        row.actual = opt(f[1]);
        row.naive = num(f[2]);
        row.weighted = num(f[3]);
        row.mean_kappa = num(f[4]);
        row.max_kappa = num(f[5]);
        row.clipped_fraction = num(f[6]);
        row.skipped_folds = static_cast<std::size_t>(*skipped);
        row.actual_normalized = opt(f[8]);
        row.naive_normalized = num(f[9]);
        row.weighted_normalized = num(f[10]);
        result.rows.push_back(row);
    }
    if (!header) {
        fail(ErrorKind::parse, "sweep csv has no header row");
    }
    return result;
}

} // namespace gsrcv
