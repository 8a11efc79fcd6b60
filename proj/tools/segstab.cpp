// segstab: robust Schur / disk D-stability of matrix segments and rank-one
// structured matrix polytopes, with a brute-force sampling oracle and
// eigenvalue-locus CSV export.

#include "segstab/segstab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace segstab;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string fmt(const Complex& z) {
    if (z.imag() == 0.0) return fmt(z.real());
    return fmt(z.real()) + (z.imag() < 0 ? " - " : " + ") + fmt(std::abs(z.imag())) + "i";
}

void print_witness(const std::optional<EigClass>& w) {
    if (!w) return;
    std::cout << "witness eigenvalue: " << fmt(w->value) << (w->is_real ? " (real" : " (complex")
              << ", margin " << fmt(w->margin) << ")\n";
}

void print_predicate(const char* name, const std::optional<PredicateResult>& r) {
    std::cout << "  " << name << ": ";
    if (!r) {
        std::cout << "not evaluated\n";
        return;
    }
    std::cout << to_string(r->verdict);
    if (r->witness) std::cout << "  [decisive eigenvalue " << fmt(r->witness->value) << "]";
    std::cout << "\n";
}

struct CheckOptions {
    bool locate = false;
    bool full_report = false;
    bool json = false;
};

int cmd_check(const ProblemFile& pf, const CheckOptions& opt) {
    if (pf.kind == ProblemKind::Polytope) {
        const RankOnePolytope P = make_polytope(pf);
        PolytopeVerdict v = check_polytope(P);
        if (opt.locate && v.status == Status::Unstable && v.failing_edge && v.edge_verdict &&
            v.edge_verdict->failed_condition &&
            *v.edge_verdict->failed_condition != FailedCondition::EndpointUnstable) {
            const auto [i, j] = *v.failing_edge;
            SegmentProblem edge{P.vertex(i), P.vertex(j), P.tol};
            v.edge_verdict->alpha_witness =
                locate_crossing(edge, *v.edge_verdict->failed_condition);
        }
        if (opt.json) {
            std::cout << report_json(v).dump(2) << "\n";
            return exit_code_for(v.status);
        }
        std::cout << "kind: polytope (n = " << P.dim() << ", N = " << P.size()
                  << ", orientation " << to_string(P.orientation) << ")\n";
        std::cout << "status: " << to_string(v.status) << "\n";
        if (v.failing_edge) {
            const auto [i, j] = *v.failing_edge;
            if (i == j)
                std::cout << "failing vertex: " << (i + 1) << "\n";
            else
                std::cout << "failing edge: (" << (i + 1) << "," << (j + 1) << ")\n";
        }
        if (v.edge_verdict) {
            if (v.edge_verdict->failed_condition)
                std::cout << "failed condition: " << to_string(*v.edge_verdict->failed_condition)
                          << "\n";
            print_witness(v.edge_verdict->witness);
            if (v.edge_verdict->alpha_witness)
                std::cout << "crossing alpha on edge: " << fmt(*v.edge_verdict->alpha_witness)
                          << "\n";
        }
        return exit_code_for(v.status);
    }

    const SegmentProblem p = make_segment(pf);
    const DiskRegion D = pf.disk.value_or(DiskRegion{0.0, 1.0});
    SegmentReport report;
    SegmentVerdict v = pf.disk ? check_segment_disk(p, D, opt.full_report ? &report : nullptr)
                               : check_segment(p, opt.full_report ? &report : nullptr);
    if (opt.locate && v.status == Status::Unstable && v.failed_condition &&
        *v.failed_condition != FailedCondition::EndpointUnstable)
        v.alpha_witness = locate_crossing(p, *v.failed_condition, D);

    if (opt.json) {
        std::cout << report_json(v, opt.full_report ? &report : nullptr).dump(2) << "\n";
        return exit_code_for(v.status);
    }

    const Index n = p.A1.rows();
    std::cout << "kind: " << to_string(pf.kind) << " (n = " << n << ")\n";
    if (pf.disk)
        std::cout << "disk: center " << fmt(D.delta) << ", radius " << fmt(D.r) << "\n";
    std::cout << "status: " << to_string(v.status) << "\n";
    if (v.failed_condition)
        std::cout << "failed condition: " << to_string(*v.failed_condition) << "\n";
    print_witness(v.witness);
    if (v.alpha_witness) std::cout << "crossing alpha: " << fmt(*v.alpha_witness) << "\n";
    if (opt.full_report) {
        std::cout << "conditions (bialternate dimension d = " << report.d << " vs Kronecker n^2 = "
                  << report.n * report.n << "):\n";
        print_predicate("endpoint A1 Schur stable",
                        std::optional<PredicateResult>(report.endpoint_a1));
        print_predicate("endpoint A2 Schur stable",
                        std::optional<PredicateResult>(report.endpoint_a2));
        print_predicate("negative real eigenvalue at +boundary (RealPlusOne)",
                        report.real_plus_one);
        print_predicate("negative real eigenvalue at -boundary (RealMinusOne)",
                        report.real_minus_one);
        print_predicate("companion eigenvalue in [1,inf) (ComplexUnitCircle)",
                        report.complex_unit_circle);
    }
    return exit_code_for(v.status);
}

int cmd_oracle(const ProblemFile& pf, std::size_t samples, std::uint64_t seed,
               std::optional<std::size_t> interior) {
    SamplingReport rep;
    if (pf.kind == ProblemKind::Polytope) {
        const RankOnePolytope P = make_polytope(pf);
        rep = sample_polytope(P, samples, interior.value_or(samples), seed);
    } else if (pf.kind == ProblemKind::DiskSegment) {
        const SegmentProblem p = make_segment(pf);
        rep = sample_segment_disk(p.A1, p.A2, *pf.disk, samples, p.tol);
    } else {
        const SegmentProblem p = make_segment(pf);
        rep = sample_segment(p.A1, p.A2, samples, p.tol);
    }
    std::cout << report_json(rep).dump(2) << "\n";
    return exit_code_for(rep.verdict);
}

int cmd_locus(const ProblemFile& pf, std::size_t samples, const std::string& out_path) {
    if (pf.kind == ProblemKind::Polytope)
        throw PreconditionError("locus: requires a segment problem file");
    const SegmentProblem p = make_segment(pf);
    const LocusTable table = eigen_locus(p.A1, p.A2, samples, p.tol);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    write_locus_csv(out, table);
    out.flush();
    if (!out) throw IoError("write failure on " + out_path);
    std::cout << "wrote " << table.rows.size() << " rows to " << out_path << "\n";
    return kExitStable;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust Schur stability of matrix segments and rank-one polytopes"};
    app.require_subcommand(1);

    std::string path;
    CheckOptions copt;
    double tol_imag = -1.0, tol_sign = -1.0, tol_one = -1.0, tol_cond = -1.0;

    CLI::App* check = app.add_subcommand("check", "decide robust stability of a problem file");
    check->add_option("file", path, "problem JSON file")->required();
    check->add_flag("--locate", copt.locate, "recover a boundary-crossing alpha when unstable");
    check->add_flag("--full-report", copt.full_report, "evaluate and print all conditions");
    check->add_flag("--json", copt.json, "machine-readable JSON report on stdout");
    check->add_option("--tol-imag", tol_imag, "override imag_tol");
    check->add_option("--tol-sign", tol_sign, "override sign_tol");
    check->add_option("--tol-one", tol_one, "override one_tol");
    check->add_option("--tol-cond", tol_cond, "override cond_max");

    std::size_t samples = 0;
    std::uint64_t seed = segstab::kDefaultSeed;
    std::size_t interior_count = 0;
    bool interior_set = false;
    CLI::App* oracle = app.add_subcommand("oracle", "brute-force sampling cross-check");
    oracle->add_option("file", path, "problem JSON file")->required();
    oracle->add_option("--samples", samples, "grid sample count (per edge for polytopes)")
        ->required();
    oracle->add_option("--seed", seed, "RNG seed for polytope interior sampling");
    oracle
        ->add_option("--interior", interior_count,
                     "random interior samples for polytopes (default: --samples)")
        ->each([&](const std::string&) { interior_set = true; });

    std::string out_path;
    CLI::App* locus = app.add_subcommand("locus", "eigenvalue loci of C(alpha) as CSV");
    locus->add_option("file", path, "segment problem JSON file")->required();
    locus->add_option("--samples", samples, "grid sample count")->required();
    locus->add_option("--out", out_path, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : segstab::kExitUsage;
    }

    try {
        segstab::ProblemFile pf = segstab::parse_problem_file(path);
        if (tol_imag >= 0) pf.tol.imag_tol = tol_imag;
        if (tol_sign >= 0) pf.tol.sign_tol = tol_sign;
        if (tol_one >= 0) pf.tol.one_tol = tol_one;
        if (tol_cond >= 0) pf.tol.cond_max = tol_cond;
        pf.tol.validate();

        if (check->parsed()) return cmd_check(pf, copt);
        if (oracle->parsed())
            return cmd_oracle(pf, samples, seed,
                              interior_set ? std::optional<std::size_t>(interior_count)
                                           : std::nullopt);
        return cmd_locus(pf, samples, out_path);
    } catch (const segstab::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return segstab::kExitUsage;
    } catch (const segstab::NotRankOneStructured& e) {
        std::cerr << "structure error: " << e.what() << " (pair " << e.offending_pair().first + 1
                  << "," << e.offending_pair().second + 1 << ", ratio " << fmt(e.sigma_ratio())
                  << ")\n";
        return segstab::kExitUsage;
    } catch (const segstab::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return segstab::kExitIo;
    } catch (const segstab::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return segstab::kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid problem: " << e.what() << "\n";
        return segstab::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return segstab::kExitNumerical;
    }
}
