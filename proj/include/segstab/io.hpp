#pragma once

#include "segstab/oracle.hpp"
#include "segstab/polytope.hpp"
#include "segstab/segment.hpp"
#include "segstab/stability.hpp"
#include "segstab/types.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace segstab {

/// File-system failure (unreadable input, unwritable output), as opposed to
/// malformed content which is a ParseError.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProblemKind { Segment, Polytope, DiskSegment };

inline const char* to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::Segment: return "segment";
        case ProblemKind::Polytope: return "polytope";
        case ProblemKind::DiskSegment: return "disk-segment";
    }
    return "?";
}

/// Parsed problem file. Exactly one of the three kinds; polytopes carry
/// either raw vertex matrices or the factored (B0, b, C) form.
struct ProblemFile {
    ProblemKind kind = ProblemKind::Segment;
    Matrix A1;
    Matrix A2;
    std::optional<DiskRegion> disk;
    std::vector<Matrix> matrices;
    std::optional<Matrix> B0;
    Vector b;
    std::vector<Vector> C;
    ToleranceConfig tol;
};

namespace detail {

inline Matrix parse_matrix(const nlohmann::json& j, const std::string& name) {
    if (!j.is_array() || j.empty())
        throw ParseError(name + ": expected a non-empty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    Matrix A;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.empty())
            throw ParseError(name + ": row " + std::to_string(r + 1) +
                             " is not a non-empty array");
        if (r == 0) {
            cols = row.size();
            A.resize(static_cast<Index>(rows), static_cast<Index>(cols));
        } else if (row.size() != cols) {
            throw ParseError(name + ": ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number())
                throw ParseError(name + ": entry (" + std::to_string(r + 1) + "," +
                                 std::to_string(c + 1) + ") is not a number");
            A(static_cast<Index>(r), static_cast<Index>(c)) = row[c].get<double>();
        }
    }
    if (A.rows() != A.cols()) throw ParseError(name + ": matrix must be square");
    if (!A.allFinite()) throw ParseError(name + ": non-finite entries");
    return A;
}

inline Vector parse_vector(const nlohmann::json& j, const std::string& name) {
    if (!j.is_array() || j.empty())
        throw ParseError(name + ": expected a non-empty array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw ParseError(name + ": entry " + std::to_string(i + 1) + " is not a number");
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    if (!v.allFinite()) throw ParseError(name + ": non-finite entries");
    return v;
}

inline nlohmann::json matrix_json(const Matrix& A) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < A.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < A.cols(); ++c) row.push_back(A(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json vector_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline double require_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(std::string(key) + ": missing or not a number");
    return j[key].get<double>();
}

} // namespace detail

/// Parse a problem from JSON text. Accepted shapes:
///   {"kind":"segment","A1":[[...]],"A2":[[...]]}
///   {"kind":"disk-segment","A1":...,"A2":...,"disk":{"delta":...,"r":...}}
///   {"kind":"polytope","matrices":[[[...]],...]}
///   {"kind":"polytope","B0":[[...]],"b":[...],"C":[[...],[...]]}
/// plus an optional "tol" object overriding imag_tol / sign_tol / one_tol /
/// cond_max. Throws ParseError on malformed input.
inline ProblemFile parse_problem_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("top level must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ParseError("missing string field \"kind\"");

    ProblemFile pf;
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "segment")
        pf.kind = ProblemKind::Segment;
    else if (kind == "disk-segment")
        pf.kind = ProblemKind::DiskSegment;
    else if (kind == "polytope")
        pf.kind = ProblemKind::Polytope;
    else
        throw ParseError("unknown kind \"" + kind + "\"");

    if (j.contains("tol")) {
        const auto& t = j["tol"];
        if (!t.is_object()) throw ParseError("tol: expected an object");
        if (t.contains("imag_tol")) pf.tol.imag_tol = detail::require_number(t, "imag_tol");
        if (t.contains("sign_tol")) pf.tol.sign_tol = detail::require_number(t, "sign_tol");
        if (t.contains("one_tol")) pf.tol.one_tol = detail::require_number(t, "one_tol");
        if (t.contains("cond_max")) pf.tol.cond_max = detail::require_number(t, "cond_max");
        try {
            pf.tol.validate();
        } catch (const PreconditionError& e) {
            throw ParseError(std::string("tol: ") + e.what());
        }
    }

    if (pf.kind == ProblemKind::Segment || pf.kind == ProblemKind::DiskSegment) {
        if (!j.contains("A1") || !j.contains("A2"))
            throw ParseError("segment problems need fields A1 and A2");
        pf.A1 = detail::parse_matrix(j["A1"], "A1");
        pf.A2 = detail::parse_matrix(j["A2"], "A2");
        if (pf.A1.rows() != pf.A2.rows())
            throw ParseError("A1 and A2 must have the same dimension");
        if (pf.kind == ProblemKind::DiskSegment) {
            if (!j.contains("disk") || !j["disk"].is_object())
                throw ParseError("disk-segment needs a \"disk\" object");
            DiskRegion D;
            D.delta = detail::require_number(j["disk"], "delta");
            D.r = detail::require_number(j["disk"], "r");
            try {
                D.validate();
            } catch (const PreconditionError& e) {
                throw ParseError(std::string("disk: ") + e.what());
            }
            pf.disk = D;
        }
        return pf;
    }

    // Polytope: raw vertices or factored form.
    if (j.contains("matrices")) {
        if (!j["matrices"].is_array() || j["matrices"].empty())
            throw ParseError("matrices: expected a non-empty array");
        for (std::size_t i = 0; i < j["matrices"].size(); ++i)
            pf.matrices.push_back(
                detail::parse_matrix(j["matrices"][i], "matrices[" + std::to_string(i + 1) + "]"));
        for (const Matrix& A : pf.matrices)
            if (A.rows() != pf.matrices.front().rows())
                throw ParseError("matrices: dimensions must agree");
        return pf;
    }
    if (j.contains("B0") && j.contains("b") && j.contains("C")) {
        pf.B0 = detail::parse_matrix(j["B0"], "B0");
        pf.b = detail::parse_vector(j["b"], "b");
        if (!j["C"].is_array() || j["C"].empty())
            throw ParseError("C: expected a non-empty array of vectors");
        for (std::size_t i = 0; i < j["C"].size(); ++i)
            pf.C.push_back(detail::parse_vector(j["C"][i], "C[" + std::to_string(i + 1) + "]"));
        const Index n = pf.B0->rows();
        if (pf.b.size() != n) throw ParseError("b: dimension must match B0");
        for (const Vector& c : pf.C)
            if (c.size() != n) throw ParseError("C: vector dimensions must match B0");
        return pf;
    }
    throw ParseError("polytope needs either \"matrices\" or all of \"B0\", \"b\", \"C\"");
}

/// Read and parse a problem file. Unreadable paths raise IoError; content
/// problems raise ParseError.
inline ProblemFile parse_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    return parse_problem_text(buf.str());
}

/// Serialize back to the canonical JSON shape. Doubles round-trip exactly
/// (shortest-representation printing), so parse(serialize(pf)) reproduces
/// bit-equal matrices.
inline nlohmann::json problem_json(const ProblemFile& pf) {
    nlohmann::json j;
    j["kind"] = to_string(pf.kind);
    if (pf.kind == ProblemKind::Segment || pf.kind == ProblemKind::DiskSegment) {
        j["A1"] = detail::matrix_json(pf.A1);
        j["A2"] = detail::matrix_json(pf.A2);
        if (pf.kind == ProblemKind::DiskSegment) {
            if (!pf.disk) throw PreconditionError("problem_json: disk-segment without disk");
            j["disk"] = {{"delta", pf.disk->delta}, {"r", pf.disk->r}};
        }
    } else if (!pf.matrices.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Matrix& A : pf.matrices) arr.push_back(detail::matrix_json(A));
        j["matrices"] = std::move(arr);
    } else {
        if (!pf.B0) throw PreconditionError("problem_json: polytope without matrices or B0");
        j["B0"] = detail::matrix_json(*pf.B0);
        j["b"] = detail::vector_json(pf.b);
        nlohmann::json arr = nlohmann::json::array();
        for (const Vector& c : pf.C) arr.push_back(detail::vector_json(c));
        j["C"] = std::move(arr);
    }
    return j;
}

inline std::string serialize_problem(const ProblemFile& pf) { return problem_json(pf).dump(2); }

/// Library-object constructors from a parsed file.
inline SegmentProblem make_segment(const ProblemFile& pf) {
    if (pf.kind == ProblemKind::Polytope)
        throw PreconditionError("make_segment: problem file holds a polytope");
    SegmentProblem p{pf.A1, pf.A2, pf.tol};
    p.validate();
    return p;
}

inline RankOnePolytope make_polytope(const ProblemFile& pf) {
    if (pf.kind != ProblemKind::Polytope)
        throw PreconditionError("make_polytope: problem file holds a segment");
    if (!pf.matrices.empty()) return validate_rank_one_structure(pf.matrices, 0, pf.tol);
    RankOnePolytope P;
    P.B0 = *pf.B0;
    P.b = pf.b;
    P.C = pf.C;
    P.orientation = Orientation::ColumnShared;
    P.tol = pf.tol;
    P.validate();
    return P;
}

/// Exit-code contract shared by every subcommand:
/// 0 stable / all inside, 1 unstable / violation, 2 marginal / near boundary,
/// 64 usage or parse errors, 70 numerical failures, 74 I/O failures.
inline constexpr int kExitStable = 0;
inline constexpr int kExitUnstable = 1;
inline constexpr int kExitMarginal = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNumerical = 70;
inline constexpr int kExitIo = 74;

inline int exit_code_for(Status s) {
    switch (s) {
        case Status::RobustStable: return kExitStable;
        case Status::Unstable: return kExitUnstable;
        case Status::Marginal: return kExitMarginal;
    }
    return kExitNumerical;
}

inline int exit_code_for(SampleVerdict v) {
    switch (v) {
        case SampleVerdict::AllInside: return kExitStable;
        case SampleVerdict::Violation: return kExitUnstable;
        case SampleVerdict::NearBoundary: return kExitMarginal;
    }
    return kExitNumerical;
}

namespace detail {

inline nlohmann::json witness_json(const std::optional<EigClass>& w) {
    if (!w) return nullptr;
    return {{"re", w->value.real()},
            {"im", w->value.imag()},
            {"is_real", w->is_real},
            {"margin", w->margin}};
}

inline nlohmann::json predicate_json(const PredicateResult& r) {
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["witness"] = witness_json(r.witness);
    if (r.witness) j["value"] = r.value;
    return j;
}

} // namespace detail

/// Machine-readable verdict report. Eigenvalue witnesses are emitted as
/// {re, im, is_real, margin}; edges are reported 1-based.
inline nlohmann::json report_json(const SegmentVerdict& v, const SegmentReport* full = nullptr) {
    nlohmann::json j;
    j["status"] = to_string(v.status);
    j["failed_condition"] =
        v.failed_condition ? nlohmann::json(to_string(*v.failed_condition)) : nullptr;
    j["witness"] = detail::witness_json(v.witness);
    j["alpha_witness"] = v.alpha_witness ? nlohmann::json(*v.alpha_witness) : nullptr;
    if (full) {
        nlohmann::json f;
        f["n"] = full->n;
        f["bialternate_dim"] = full->d;
        f["kronecker_dim"] = full->n * full->n;
        f["endpoint_a1"] = detail::predicate_json(full->endpoint_a1);
        f["endpoint_a2"] = detail::predicate_json(full->endpoint_a2);
        f["real_plus_one"] =
            full->real_plus_one ? detail::predicate_json(*full->real_plus_one) : nullptr;
        f["real_minus_one"] =
            full->real_minus_one ? detail::predicate_json(*full->real_minus_one) : nullptr;
        f["complex_unit_circle"] = full->complex_unit_circle
                                       ? detail::predicate_json(*full->complex_unit_circle)
                                       : nullptr;
        f["cond_plus"] = full->cond_plus;
        f["cond_minus"] = full->cond_minus;
        f["cond_f0"] = full->cond_f0;
        j["conditions"] = std::move(f);
    }
    return j;
}

inline nlohmann::json report_json(const PolytopeVerdict& v) {
    nlohmann::json j;
    j["status"] = to_string(v.status);
    if (v.failing_edge)
        j["failing_edge"] = {v.failing_edge->first + 1, v.failing_edge->second + 1};
    else
        j["failing_edge"] = nullptr;
    j["edge_verdict"] = v.edge_verdict ? report_json(*v.edge_verdict) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json report_json(const SamplingReport& r) {
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["max_rho"] = r.max_rho;
    j["argmax_alpha"] = r.argmax_alpha;
    if (r.argmax_edge)
        j["argmax_edge"] = {r.argmax_edge->first + 1, r.argmax_edge->second + 1};
    else
        j["argmax_edge"] = nullptr;
    j["samples"] = r.samples;
    return j;
}

/// Locus CSV: header `alpha,re_1,im_1,...,re_n,im_n`, one row per grid point,
/// every value printed as %.16e (17 significant digits, round-trip exact).
/// Output bytes are a pure function of the table.
inline void write_locus_csv(std::ostream& out, const LocusTable& table) {
    const std::size_t n = table.rows.empty() ? 0 : table.rows.front().size();
    out << "alpha";
    for (std::size_t i = 1; i <= n; ++i) out << ",re_" << i << ",im_" << i;
    out << "\n";
    char buf[40];
    const auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.16e", x);
        out << buf;
    };
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        put(table.alphas[k]);
        for (const Complex& lam : table.rows[k]) {
            out << ',';
            put(lam.real());
            out << ',';
            put(lam.imag());
        }
        out << "\n";
    }
}

} // namespace segstab
