#pragma once

#include "segstab/linalg.hpp"
#include "segstab/polytope.hpp"
#include "segstab/segment.hpp"
#include "segstab/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace segstab {

/// Default seed for the polytope oracle's random simplex draws.
inline constexpr std::uint64_t kDefaultSeed = 123456789ull;

enum class SampleVerdict { AllInside, Violation, NearBoundary };

inline const char* to_string(SampleVerdict v) {
    switch (v) {
        case SampleVerdict::AllInside: return "AllInside";
        case SampleVerdict::Violation: return "Violation";
        case SampleVerdict::NearBoundary: return "NearBoundary";
    }
    return "?";
}

/// Result of brute-force sampling. max_rho is the largest spectral radius
/// seen (largest |lambda - delta| for disk sampling); argmax_alpha is the
/// parameter achieving it: {alpha} for segment grids and edge samples (with
/// argmax_edge naming the 0-based vertex pair), or the full simplex weight
/// vector for polytope-interior samples (argmax_edge empty).
///
/// Sampling falsifies, it does not certify: a violation can hide between
/// grid points, so AllInside means "no violation found", nothing stronger.
struct SamplingReport {
    double max_rho = 0.0;
    std::vector<double> argmax_alpha;
    std::optional<std::pair<Index, Index>> argmax_edge;
    std::size_t samples = 0;
    SampleVerdict verdict = SampleVerdict::AllInside;
};

namespace detail {

inline SampleVerdict classify_sample(double vmax, double boundary, double one_tol) {
    if (vmax >= boundary + one_tol) return SampleVerdict::Violation;
    if (vmax > boundary - one_tol) return SampleVerdict::NearBoundary;
    return SampleVerdict::AllInside;
}

inline double rho_at(const Matrix& A, const std::string& where) {
    try {
        return spectral_radius(A);
    } catch (const EigensolverError& e) {
        throw EigensolverError(std::string(e.what()) + " (" + where + ")");
    }
}

inline double disk_radius_at(const Matrix& A, double delta, const std::string& where) {
    try {
        double m = 0.0;
        for (const Complex& lam : eigenvalues(A)) m = std::max(m, std::abs(lam - Complex(delta, 0.0)));
        return m;
    } catch (const EigensolverError& e) {
        throw EigensolverError(std::string(e.what()) + " (" + where + ")");
    }
}

/// Uniform double in [0, 1) from the top 53 bits of the generator.
inline double u01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Random point on the N-simplex via exponential spacings: N standard
/// exponentials normalized by their sum.
inline std::vector<double> simplex_point(std::mt19937_64& gen, std::size_t N) {
    std::vector<double> w(N);
    double total = 0.0;
    for (double& x : w) {
        x = -std::log1p(-u01(gen));
        total += x;
    }
    for (double& x : w) x /= total;
    return w;
}

} // namespace detail

/// Evaluate rho(C(alpha)) on the uniform grid alpha = k/(K-1), k = 0..K-1.
/// Violation iff max rho >= 1 + one_tol; NearBoundary iff it lands inside
/// the one_tol band; AllInside otherwise. Ties in the max resolve to the
/// smaller alpha.
inline SamplingReport sample_segment(const Matrix& A1, const Matrix& A2, std::size_t K,
                                     const ToleranceConfig& tol = {}) {
    SegmentProblem p{A1, A2, tol};
    p.validate();
    if (K < 2) throw PreconditionError("sample_segment: K >= 2 required");

    SamplingReport rep;
    rep.max_rho = -1.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double alpha = static_cast<double>(k) / static_cast<double>(K - 1);
        const double rho = detail::rho_at(p.C(alpha), "alpha=" + std::to_string(alpha));
        if (rho > rep.max_rho) {
            rep.max_rho = rho;
            rep.argmax_alpha = {alpha};
        }
    }
    rep.samples = K;
    rep.verdict = detail::classify_sample(rep.max_rho, 1.0, tol.one_tol);
    return rep;
}

/// Disk variant: max_rho holds max |lambda - delta| over the grid, compared
/// against the disk radius r with the same one_tol bands.
inline SamplingReport sample_segment_disk(const Matrix& A1, const Matrix& A2, const DiskRegion& D,
                                          std::size_t K, const ToleranceConfig& tol = {}) {
    SegmentProblem p{A1, A2, tol};
    p.validate();
    D.validate();
    if (K < 2) throw PreconditionError("sample_segment_disk: K >= 2 required");

    SamplingReport rep;
    rep.max_rho = -1.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double alpha = static_cast<double>(k) / static_cast<double>(K - 1);
        const double m =
            detail::disk_radius_at(p.C(alpha), D.delta, "alpha=" + std::to_string(alpha));
        if (m > rep.max_rho) {
            rep.max_rho = m;
            rep.argmax_alpha = {alpha};
        }
    }
    rep.samples = K;
    rep.verdict = detail::classify_sample(rep.max_rho, D.r, tol.one_tol);
    return rep;
}

/// Polytope sampling: a K_edges grid on every edge (i, j), i < j, plus
/// K_interior random simplex points (seeded, reproducible: identical seeds
/// and inputs give bit-identical reports). A singleton polytope reduces to
/// its lone vertex.
inline SamplingReport sample_polytope(const RankOnePolytope& P, std::size_t K_edges,
                                      std::size_t K_interior,
                                      std::uint64_t seed = kDefaultSeed) {
    P.validate();
    const ToleranceConfig& tol = P.tol;
    const Index N = P.size();

    SamplingReport rep;
    rep.max_rho = -1.0;

    if (N == 1) {
        rep.max_rho = detail::rho_at(P.vertex(0), "vertex 1");
        rep.argmax_alpha = {1.0};
        rep.samples = 1;
        rep.verdict = detail::classify_sample(rep.max_rho, 1.0, tol.one_tol);
        return rep;
    }
    if (K_edges < 2) throw PreconditionError("sample_polytope: K_edges >= 2 required");

    std::vector<Matrix> vertices;
    vertices.reserve(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) vertices.push_back(P.vertex(i));

    for (Index i = 0; i < N; ++i) {
        for (Index j = i + 1; j < N; ++j) {
            for (std::size_t k = 0; k < K_edges; ++k) {
                const double alpha = static_cast<double>(k) / static_cast<double>(K_edges - 1);
                const Matrix C = alpha * vertices[static_cast<std::size_t>(i)] +
                                 (1.0 - alpha) * vertices[static_cast<std::size_t>(j)];
                const double rho = detail::rho_at(
                    C, "edge (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                           "), alpha=" + std::to_string(alpha));
                if (rho > rep.max_rho) {
                    rep.max_rho = rho;
                    rep.argmax_alpha = {alpha};
                    rep.argmax_edge = {i, j};
                }
                ++rep.samples;
            }
        }
    }

    std::mt19937_64 gen(seed);
    for (std::size_t t = 0; t < K_interior; ++t) {
        const std::vector<double> w = detail::simplex_point(gen, static_cast<std::size_t>(N));
        Matrix C = Matrix::Zero(P.dim(), P.dim());
        for (Index i = 0; i < N; ++i) C += w[static_cast<std::size_t>(i)] * vertices[static_cast<std::size_t>(i)];
        const double rho = detail::rho_at(C, "interior sample " + std::to_string(t + 1));
        if (rho > rep.max_rho) {
            rep.max_rho = rho;
            rep.argmax_alpha = w;
            rep.argmax_edge.reset();
        }
        ++rep.samples;
    }

    rep.verdict = detail::classify_sample(rep.max_rho, 1.0, tol.one_tol);
    return rep;
}

/// Eigenvalue loci of C(alpha) on a K-point grid. Rows are ordered by
/// nearest-neighbor continuation: row k's eigenvalues are permuted by a
/// minimum-cost assignment against row k-1, so each column traces a
/// continuous curve.
struct LocusTable {
    std::vector<double> alphas;
    std::vector<std::vector<Complex>> rows; // rows[k][i]: i-th locus at alphas[k]
};

inline LocusTable eigen_locus(const Matrix& A1, const Matrix& A2, std::size_t K,
                              const ToleranceConfig& tol = {}) {
    SegmentProblem p{A1, A2, tol};
    p.validate();
    if (K < 2) throw PreconditionError("eigen_locus: K >= 2 required");
    const Index n = A1.rows();

    LocusTable table;
    table.alphas.reserve(K);
    table.rows.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double alpha = static_cast<double>(k) / static_cast<double>(K - 1);
        table.alphas.push_back(alpha);
        Spectrum s;
        try {
            s = eigenvalues(p.C(alpha));
        } catch (const EigensolverError& e) {
            throw EigensolverError(std::string(e.what()) + " (alpha=" + std::to_string(alpha) +
                                   ")");
        }
        std::vector<Complex> row = s.values;
        if (!table.rows.empty() && n > 0) {
            const std::vector<Complex>& prev = table.rows.back();
            Matrix cost(n, n);
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j)
                    cost(i, j) = std::abs(prev[static_cast<std::size_t>(i)] -
                                          row[static_cast<std::size_t>(j)]);
            const std::vector<Index> match = min_cost_assignment(cost);
            std::vector<Complex> ordered(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i)
                ordered[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(match[static_cast<std::size_t>(i)])];
            row = std::move(ordered);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace segstab
