#pragma once

// Graph signals: synthetic noisy bandlimited signals, the graph Fourier
// transform, and the signal CSV format.

#include "error.hpp"
#include "format.hpp"
#include "graph.hpp"
#include "random.hpp"

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gsrcv {

/// A real value per vertex plus the set S of vertices whose values are
/// treated as known. Values outside S may hold ground truth or NaN when the
/// true value is unavailable.
struct GraphSignal {
    Vector values;
    VertexSet known;

    GraphSignal() = default;
    GraphSignal(Vector v, VertexSet s) : values(std::move(v)), known(std::move(s)) {
        known.check_bounds(size());
        require(!known.empty(), "a graph signal needs at least one known vertex");
        for (const auto k : known) {
            require(std::isfinite(values(static_cast<Eigen::Index>(k))),
                    "known vertex " + std::to_string(k) + " has no value");
        }
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }

    VertexSet unknown() const { return known.complement(size()); }

    Vector known_values() const { return restrict(values, known); }

    /// True when every vertex, known or not, carries a finite value.
    bool has_ground_truth() const { return values.allFinite(); }

    GraphSignal with_known(VertexSet s) const { return GraphSignal(values, std::move(s)); }
};

struct BandlimitedSpec {
    std::size_t bandwidth = 1;   ///< number of retained low frequencies
    double signal_power = 1.0;   ///< ||U_R alpha||^2 / n
    double noise_power = 0.0;    ///< ||noise||^2 / n
    std::uint64_t seed = 0;
};

namespace detail {

inline Vector gaussian_vector(Rng& rng, Eigen::Index size) {
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v(i) = rng.normal();
    }
    return v;
}

// Rescales v so that ||v||^2 / dim == power exactly (up to rounding).
inline void rescale_to_power(Vector& v, double power) {
    const double current = v.squaredNorm() / static_cast<double>(v.size());
    if (power == 0.0 || current == 0.0) {
        v.setZero();
        return;
    }
    v *= std::sqrt(power / current);
}

} // namespace detail

/// x = U_R alpha + noise, with both parts rescaled to their exact target
/// mean-square power. Returns the full signal with every vertex known.
inline GraphSignal synth_bandlimited(const SpectralBasis& basis, const BandlimitedSpec& spec) {
    const std::size_t n = basis.size();
    require(spec.bandwidth >= 1 && spec.bandwidth <= n,
            "bandwidth " + std::to_string(spec.bandwidth) + " outside [1, " + std::to_string(n) + "]");
    require(spec.signal_power >= 0.0 && spec.noise_power >= 0.0, "powers must be non-negative");

    const auto r = static_cast<Eigen::Index>(spec.bandwidth);
    Rng coeff_rng(mix_seed(spec.seed, 0));
    Rng noise_rng(mix_seed(spec.seed, 1));

    const Vector alpha = detail::gaussian_vector(coeff_rng, r);
    Vector smooth = basis.eigenvectors().leftCols(r) * alpha;
    detail::rescale_to_power(smooth, spec.signal_power);

    Vector noise = detail::gaussian_vector(noise_rng, static_cast<Eigen::Index>(n));
    detail::rescale_to_power(noise, spec.noise_power);

    return GraphSignal(smooth + noise, VertexSet::all(n));
}

/// Graph Fourier transform U^T x.
inline Vector gft(const SpectralBasis& basis, const Vector& x) {
    require(static_cast<std::size_t>(x.size()) == basis.size(),
            "signal length " + std::to_string(x.size()) + " does not match graph size " +
                std::to_string(basis.size()));
    return basis.eigenvectors().transpose() * x;
}

inline Vector inverse_gft(const SpectralBasis& basis, const Vector& coeffs) {
    require(static_cast<std::size_t>(coeffs.size()) == basis.size(),
            "coefficient length does not match graph size");
    return basis.eigenvectors() * coeffs;
}

/// In-band coefficients alpha' (first r frequencies) and out-of-band
/// coefficients beta (the rest): x = U_R alpha' + U_Rc beta.
struct SpectralParts {
    Vector in_band;
    Vector out_of_band;
};

inline SpectralParts spectral_split(const SpectralBasis& basis, const Vector& x, std::size_t r) {
    require(r >= 1 && r <= basis.size(), "bandwidth " + std::to_string(r) + " outside [1, " +
                                             std::to_string(basis.size()) + "]");
    const Vector c = gft(basis, x);
    const auto ri = static_cast<Eigen::Index>(r);
    return {c.head(ri), c.tail(c.size() - ri)};
}

// --- signal CSV ---------------------------------------------------------------
//
//   vertex,value,known
//   0,1.25,1
//   1,,0          (value absent)
//

inline void write_signal_csv(std::ostream& out, const GraphSignal& s) {
    out << "vertex,value,known\n";
    for (std::size_t v = 0; v < s.size(); ++v) {
        const double x = s.values(static_cast<Eigen::Index>(v));
        out << v << ',' << (std::isfinite(x) ? format_double(x) : std::string()) << ','
            << (s.known.contains(v) ? 1 : 0) << '\n';
    }
}

inline GraphSignal read_signal_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<std::pair<std::size_t, double>> rows;
    std::vector<std::size_t> known;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        if (!header) {
            if (body != "vertex,value,known") {
                fail(ErrorKind::parse, "signal csv line " + std::to_string(line_no) +
                                           ": expected header 'vertex,value,known'");
            }
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ss{std::string(body)};
        for (std::string cell; std::getline(ss, cell, ',');) {
            f.push_back(cell);
        }
        if (body.back() == ',') {
            f.emplace_back();
        }
        const auto where = "signal csv line " + std::to_string(line_no);
        if (f.size() != 3) {
            fail(ErrorKind::parse, where + ": expected 3 fields");
        }
        const auto v = parse_uint(f[0]);
        const auto flag = parse_uint(f[2]);
        if (!v || !flag || *flag > 1) {
            fail(ErrorKind::parse, where + ": bad vertex or known flag");
        }
        double value = std::numeric_limits<double>::quiet_NaN();
        if (!trim(f[1]).empty()) {
            const auto parsed = parse_double(f[1]);
            if (!parsed) {
                fail(ErrorKind::parse, where + ": bad value '" + f[1] + "'");
            }
            value = *parsed;
        }
        rows.emplace_back(static_cast<std::size_t>(*v), value);
        if (*flag == 1) {
            known.push_back(static_cast<std::size_t>(*v));
        }
    }
    Vector values = Vector::Constant(static_cast<Eigen::Index>(rows.size()),
                                     std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> seen(rows.size(), false);
    for (const auto& [v, x] : rows) {
        if (v >= rows.size() || seen[v]) {
            fail(ErrorKind::parse, "signal csv vertices must be exactly 0.." +
                                       std::to_string(rows.size() - 1));
        }
        seen[v] = true;
        values(static_cast<Eigen::Index>(v)) = x;
    }
    try {
        return GraphSignal(std::move(values), VertexSet(std::move(known)));
    } catch (const Error& e) {
        fail(ErrorKind::parse, std::string("invalid signal csv: ") + e.what());
    }
}

} // namespace gsrcv
