#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace segstab;
using namespace testsup;

namespace {

RankOnePolytope ex3_polytope() {
    RankOnePolytope P;
    P.B0 = ex3_B0();
    P.b = ex3_b();
    P.C = ex3_C();
    P.orientation = Orientation::ColumnShared;
    return P;
}

/// Draw a random Example-3-style polytope: same B0 and b, fresh c vectors,
/// shrunk until every generator is comfortably Schur stable.
RankOnePolytope random_ex3_variant(std::mt19937_64& gen, Index N) {
    RankOnePolytope P;
    P.B0 = ex3_B0();
    P.b = ex3_b();
    P.orientation = Orientation::ColumnShared;
    for (Index i = 0; i < N; ++i) P.C.push_back(random_vector(gen, 3, 0.6));
    for (int tries = 0; tries < 80; ++tries) {
        bool ok = true;
        for (Index i = 0; i < N; ++i)
            if (spectral_radius(P.vertex(i)) >= 0.97) {
                ok = false;
                break;
            }
        if (ok) break;
        for (Vector& c : P.C) c *= 0.7;
    }
    return P;
}

Status conjunction_over_edges(const RankOnePolytope& P) {
    bool marginal = false;
    for (Index i = 0; i < P.size(); ++i)
        for (Index j = i + 1; j < P.size(); ++j) {
            const auto v = check_segment(SegmentProblem{P.vertex(i), P.vertex(j), P.tol});
            if (v.status == Status::Unstable) return Status::Unstable;
            if (v.status == Status::Marginal) marginal = true;
        }
    return marginal ? Status::Marginal : Status::RobustStable;
}

} // namespace

TEST_CASE("validate_rank_one_structure recovers the shared column factor",
          "[polytope]") {
    const auto P = validate_rank_one_structure(ex3_vertices());
    CHECK(P.orientation == Orientation::ColumnShared);
    REQUIRE(P.b.size() == 3);
    // b must be proportional to (1, -1, 1)
    Vector ref(3);
    ref << 1.0, -1.0, 1.0;
    ref.normalize();
    CHECK(std::abs(std::abs(P.b.dot(ref)) - 1.0) < 1e-12);
    CHECK(P.b.norm() == Catch::Approx(1.0).margin(1e-12));
    // the factored form must reconstruct every vertex
    const auto verts = ex3_vertices();
    for (Index i = 0; i < 3; ++i)
        CHECK((P.vertex(i) - verts[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff() <
              1e-12);
}

TEST_CASE("validate_rank_one_structure accepts identical matrices", "[polytope]") {
    const Matrix A = ex1_A1();
    const auto P = validate_rank_one_structure({A, A});
    CHECK(P.size() == 2);
    for (Index i = 0; i < 2; ++i)
        CHECK((P.vertex(i) - A).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("validate_rank_one_structure rejects rank-two differences", "[polytope]") {
    Matrix D1 = Matrix::Zero(2, 2), D2 = Matrix::Zero(2, 2);
    D1(0, 0) = 0.1;
    D1(1, 1) = 0.2;
    D2(0, 0) = 0.3;
    D2(1, 1) = 0.5;
    try {
        validate_rank_one_structure({D1, D2});
        FAIL("expected NotRankOneStructured");
    } catch (const NotRankOneStructured& e) {
        CHECK(e.offending_pair() == std::make_pair(0, 1));
        CHECK(e.sigma_ratio() > kRankOneRatioTol);
    }
}

TEST_CASE("validate_rank_one_structure detects the row-shared orientation",
          "[polytope]") {
    std::mt19937_64 gen(401);
    const Matrix B0 = random_stable(gen, 3, 0.5);
    Vector b(3);
    b << 2.0, 1.0, -1.0;
    std::vector<Matrix> mats;
    std::vector<Vector> cs;
    for (int i = 0; i < 3; ++i) cs.push_back(random_vector(gen, 3, 0.4));
    for (const Vector& c : cs) mats.push_back(B0 + c * b.transpose());
    const auto P = validate_rank_one_structure(mats);
    CHECK(P.orientation == Orientation::RowShared);
    for (Index i = 0; i < 3; ++i)
        CHECK((P.vertex(i) - mats[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff() <
              1e-10);
}

TEST_CASE("validate_rank_one_structure rejects mixed factor directions", "[polytope]") {
    std::mt19937_64 gen(402);
    const Matrix B0 = random_stable(gen, 3, 0.5);
    Vector b(3), x(3), y(3);
    b << 1.0, -1.0, 0.5;
    x << 0.3, 0.9, -0.4;
    y << -0.2, 0.6, 1.1;
    // one column-shared bump, one row-shared bump: their difference has rank 2
    const std::vector<Matrix> mats{B0, B0 + b * x.transpose(), B0 + y * b.transpose()};
    CHECK_THROWS_AS(validate_rank_one_structure(mats), NotRankOneStructured);
}

TEST_CASE("factored representation is base-point independent", "[polytope]") {
    const auto verts = ex3_vertices();
    const auto s0 = check_polytope(validate_rank_one_structure(verts, 0)).status;
    const auto s1 = check_polytope(validate_rank_one_structure(verts, 1)).status;
    const auto s2 = check_polytope(validate_rank_one_structure(verts, 2)).status;
    CHECK(s0 == s1);
    CHECK(s1 == s2);

    std::mt19937_64 gen(403);
    for (int t = 0; t < 10; ++t) {
        const auto P = random_structured_polytope(gen, 3, 3);
        std::vector<Matrix> mats;
        for (Index i = 0; i < P.size(); ++i) mats.push_back(P.vertex(i));
        const auto r0 = check_polytope(validate_rank_one_structure(mats, 0)).status;
        const auto r1 = check_polytope(validate_rank_one_structure(mats, 1)).status;
        const auto r2 = check_polytope(validate_rank_one_structure(mats, 2)).status;
        CHECK(r0 == r1);
        CHECK(r1 == r2);
    }
}

TEST_CASE("edge_F_matrices reproduces the printed coefficient matrices", "[polytope]") {
    const auto P = ex3_polytope();

    const auto [F0_12, F1_12] = edge_F_matrices(P, 0, 1);
    Matrix e0(3, 3), e1(3, 3);
    e0 << 0.9, -0.3, 0.4, 0.125, 1.375, -0.5, -0.025, -0.075, 1.1;
    e1 << -0.3, 0.7, -0.4, 0.375, -0.875, 0.5, -0.075, 0.175, -0.1;
    CHECK((F0_12 - e0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((F1_12 - e1).cwiseAbs().maxCoeff() < 1e-12);

    const auto [F0_13, F1_13] = edge_F_matrices(P, 0, 2);
    Matrix f0(3, 3), f1(3, 3);
    f0 << 1.0, 0.08, -0.08, 0.0, 0.9, 0.1, 0.0, 0.02, 0.98;
    f1 << -0.4, 0.32, 0.08, 0.5, -0.4, -0.1, -0.1, 0.08, 0.02;
    CHECK((F0_13 - f0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((F1_13 - f1).cwiseAbs().maxCoeff() < 1e-12);

    const auto [F0_23, F1_23] = edge_F_matrices(P, 1, 2);
    Matrix g1(3, 3);
    g1 << -0.1, -0.38, 0.48, 0.125, 0.475, -0.6, -0.025, -0.095, 0.12;
    // F0 for edges (1,3) and (2,3) coincide: both use the third vertex
    CHECK((F0_23 - f0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((F1_23 - g1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("edge_F_matrices rejects a degenerate edge", "[polytope]") {
    const auto P = ex3_polytope();
    CHECK_THROWS_AS(edge_F_matrices(P, 1, 1), PreconditionError);
}

TEST_CASE("edge F2 vanishes exactly on structured edges and only there", "[polytope]") {
    // the factored type guarantees rank-one differences, so the structural
    // self-check inside edge_F_matrices stays quiet on every valid edge
    const auto P = ex3_polytope();
    for (Index i = 0; i < 3; ++i)
        for (Index j = i + 1; j < 3; ++j) {
            const auto F = build_F(P.vertex(i), P.vertex(j));
            CHECK(F.F2.cwiseAbs().maxCoeff() <= 1e-10);
            CHECK_NOTHROW(edge_F_matrices(P, i, j));
        }
    // whereas a rank-two perturbation of a vertex pair produces F2 != 0,
    // which is exactly what the self-check exists to catch
    Matrix A2 = P.vertex(1);
    A2(0, 0) += 0.05;
    A2(1, 1) -= 0.05;
    const auto F = build_F(P.vertex(0), A2);
    CHECK(F.F2.cwiseAbs().maxCoeff() > 1e-10);
}

TEST_CASE("check_polytope accepts the third fixture family", "[polytope]") {
    const auto v = check_polytope(ex3_polytope());
    CHECK(v.status == Status::RobustStable);
    CHECK_FALSE(v.failing_edge.has_value());
    CHECK_FALSE(v.edge_verdict.has_value());
}

TEST_CASE("check_polytope accepts a stable singleton", "[polytope]") {
    RankOnePolytope P;
    P.B0 = ex1_A1();
    Vector b(3);
    b << 1.0, 0.0, 0.0;
    P.b = b;
    P.C = {Vector::Zero(3)};
    const auto v = check_polytope(P);
    CHECK(v.status == Status::RobustStable);
}

TEST_CASE("scaling the third c vector destabilizes its own generator", "[polytope]") {
    // For this family the reachable characteristic polynomials interpolate
    // affinely, and a convex combination of stable quadratics stays in the
    // stability triangle: an edge cannot fail while its endpoints hold. The
    // first failure under scaling c3 is therefore the generator itself.
    RankOnePolytope P = ex3_polytope();
    P.C[2] *= 9.0;
    REQUIRE(is_schur_stable(P.vertex(2)).verdict == Verdict::Fails);
    const auto v = check_polytope(P);
    CHECK(v.status == Status::Unstable);
    REQUIRE(v.failing_edge.has_value());
    CHECK(v.failing_edge->first == 2);
    CHECK(v.failing_edge->second == 2);
    REQUIRE(v.edge_verdict.has_value());
    REQUIRE(v.edge_verdict->failed_condition.has_value());
    CHECK(*v.edge_verdict->failed_condition == FailedCondition::EndpointUnstable);
    CHECK(v.edge_verdict->witness.has_value());
}

TEST_CASE("polytopes sharing the fixture base stay robustly stable", "[polytope]") {
    // B0's rows are proportional to b: every family member is singular and
    // its characteristic polynomial is z times a quadratic whose coefficients
    // interpolate affinely across the polytope. Stable generators then force
    // stability of the whole family.
    std::mt19937_64 gen(404);
    for (int t = 0; t < 20; ++t) {
        const Index N = 2 + static_cast<Index>(gen() % 3);
        const auto P = random_ex3_variant(gen, N);
        bool all_stable = true;
        for (Index i = 0; i < N; ++i)
            if (is_schur_stable(P.vertex(i)).verdict != Verdict::Holds) all_stable = false;
        if (!all_stable) continue;
        const auto v = check_polytope(P);
        CHECK(v.status == Status::RobustStable);
        // determinant of every generator vanishes (B0 + b c^T has rank <= 2)
        for (Index i = 0; i < N; ++i)
            CHECK(std::abs(P.vertex(i).determinant()) < 1e-12);
    }
}

TEST_CASE("check_polytope flags a genuine edge failure with stable generators",
          "[polytope]") {
    const auto file = parse_problem_file(data_path("edge_fail_polytope.json"));
    const auto P = make_polytope(file);
    // all three generators are Schur stable on their own
    for (Index i = 0; i < P.size(); ++i)
        CHECK(is_schur_stable(P.vertex(i)).verdict == Verdict::Holds);
    const auto v = check_polytope(P);
    CHECK(v.status == Status::Unstable);
    REQUIRE(v.failing_edge.has_value());
    CHECK(v.failing_edge->first == 0);
    CHECK(v.failing_edge->second == 2);
    REQUIRE(v.edge_verdict.has_value());
    REQUIRE(v.edge_verdict->failed_condition.has_value());
    CHECK(*v.edge_verdict->failed_condition == FailedCondition::ComplexUnitCircle);

    // the crossing parameter is recoverable and verifiable on that edge
    const SegmentProblem edge{P.vertex(0), P.vertex(2), P.tol};
    const double alpha = locate_crossing(edge, FailedCondition::ComplexUnitCircle);
    CHECK(alpha >= 0.0);
    CHECK(alpha <= 1.0);
    double dist = 1e300;
    for (const Complex& z : eigenvalues(edge.C(alpha)))
        dist = std::min(dist, std::abs(std::abs(z) - 1.0));
    CHECK(dist <= kCrossingVerifyTol);

    // sampling confirms the violation lives strictly inside the edge
    const auto sampled = sample_segment(P.vertex(0), P.vertex(2), 2001);
    CHECK(sampled.verdict == SampleVerdict::Violation);
    CHECK(sampled.max_rho > 1.4);
}

TEST_CASE("rank_one_spectrum basic cases", "[polytope]") {
    Vector e1 = Vector::Zero(3);
    e1(0) = 1.0;
    const Spectrum s1 = rank_one_spectrum(e1, e1);
    REQUIRE(s1.size() == 3);
    CHECK(match_distance(s1, {Complex(0, 0), Complex(0, 0), Complex(1, 0)}) < 1e-14);

    Vector u(2), v(2);
    u << 1.0, 2.0;
    v << 3.0, -1.0;
    const Spectrum s2 = rank_one_spectrum(u, v);
    CHECK(match_distance(s2, {Complex(0, 0), Complex(1, 0)}) < 1e-14);
}

TEST_CASE("rank_one_spectrum matches the eigensolver", "[polytope]") {
    std::mt19937_64 gen(405);
    for (int t = 0; t < 40; ++t) {
        const Index n = 2 + static_cast<Index>(gen() % 4);
        const Vector u = random_vector(gen, n);
        const Vector v = random_vector(gen, n);
        const Spectrum direct = rank_one_spectrum(u, v);
        const Spectrum solved = eigenvalues(Matrix(u * v.transpose()));
        CHECK(match_distance(direct, solved.values) < 1e-8);
    }
}

TEST_CASE("trace identity for rank-one matrices", "[polytope]") {
    std::mt19937_64 gen(406);
    for (int t = 0; t < 50; ++t) {
        const Index n = 2 + static_cast<Index>(gen() % 4);
        const Vector u = random_vector(gen, n);
        const Vector v = random_vector(gen, n);
        const Matrix A = u * v.transpose();
        const double lhs = A.trace();
        const double rhs = 1.0 - (Matrix::Identity(n, n) - A).determinant();
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("charpoly_convex_combination at a vertex", "[polytope]") {
    const auto P = ex3_polytope();
    const auto p = charpoly_convex_combination(P, {1.0, 0.0, 0.0});
    const auto direct = characteristic_polynomial(P.vertex(0));
    REQUIRE(p.size() == direct.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(p[i] == Catch::Approx(direct[i]).margin(1e-12));
}

TEST_CASE("charpoly_convex_combination matches the combined matrix", "[polytope]") {
    const auto P = ex3_polytope();
    const auto p = charpoly_convex_combination(P, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    const Matrix avg = (P.vertex(0) + P.vertex(1) + P.vertex(2)) / 3.0;
    const auto direct = characteristic_polynomial(avg);
    REQUIRE(p.size() == direct.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(std::abs(p[i] - direct[i]) < 1e-10);
}

TEST_CASE("charpoly interpolation needs the rank-one hypothesis", "[polytope]") {
    // negative control: diagonal pair with rank-two difference
    Matrix D1 = Matrix::Zero(2, 2), D2 = Matrix::Zero(2, 2);
    D1(0, 0) = 0.1;
    D1(1, 1) = 0.2;
    D2(0, 0) = 0.3;
    D2(1, 1) = 0.5;
    const auto p1 = characteristic_polynomial(D1);
    const auto p2 = characteristic_polynomial(D2);
    std::vector<double> mixed(p1.size());
    for (std::size_t i = 0; i < p1.size(); ++i) mixed[i] = 0.5 * (p1[i] + p2[i]);
    const auto direct = characteristic_polynomial(Matrix(0.5 * (D1 + D2)));
    double diff = 0.0;
    for (std::size_t i = 0; i < mixed.size(); ++i)
        diff = std::max(diff, std::abs(mixed[i] - direct[i]));
    CHECK(diff > 1e-4);
}

TEST_CASE("charpoly_convex_combination validates weights", "[polytope]") {
    const auto P = ex3_polytope();
    CHECK_THROWS_AS(charpoly_convex_combination(P, {0.5, 0.5}), PreconditionError);
    CHECK_THROWS_AS(charpoly_convex_combination(P, {0.7, 0.2, 0.2}), PreconditionError);
    CHECK_THROWS_AS(charpoly_convex_combination(P, {-0.1, 0.6, 0.5}), PreconditionError);
}

TEST_CASE("charpoly interpolation across random structured polytopes", "[polytope]") {
    std::mt19937_64 gen(407);
    for (int t = 0; t < 25; ++t) {
        const Index n = 2 + static_cast<Index>(gen() % 4);
        const Index N = 2 + static_cast<Index>(gen() % 3);
        const auto P = random_structured_polytope(gen, n, N);
        // random simplex weights
        std::vector<double> w(static_cast<std::size_t>(N));
        double total = 0.0;
        for (double& x : w) {
            x = -std::log1p(-u01(gen));
            total += x;
        }
        Matrix combined = Matrix::Zero(n, n);
        for (Index i = 0; i < N; ++i) {
            w[static_cast<std::size_t>(i)] /= total;
            combined += w[static_cast<std::size_t>(i)] * P.vertex(i);
        }
        const auto interp = charpoly_convex_combination(P, w);
        const auto direct = characteristic_polynomial(combined);
        for (std::size_t i = 0; i < interp.size(); ++i)
            CHECK(std::abs(interp[i] - direct[i]) < 1e-8);
    }
}

TEST_CASE("edge reduction matches full segment checks", "[polytope]") {
    std::mt19937_64 gen(408);
    // fixtures first: the stable family and the edge-failure family
    CHECK(check_polytope(ex3_polytope()).status == conjunction_over_edges(ex3_polytope()));
    const auto file = parse_problem_file(data_path("edge_fail_polytope.json"));
    const auto EF = make_polytope(file);
    CHECK(check_polytope(EF).status == conjunction_over_edges(EF));
    for (int t = 0; t < 25; ++t) {
        const Index n = 2 + static_cast<Index>(gen() % 3);
        const Index N = 2 + static_cast<Index>(gen() % 3);
        const auto P = random_structured_polytope(gen, n, N);
        CHECK(check_polytope(P).status == conjunction_over_edges(P));
    }
}

TEST_CASE("check_polytope agrees with simplex sampling", "[polytope]") {
    std::mt19937_64 gen(409);
    int done = 0;
    while (done < 12) {
        const Index n = 2 + static_cast<Index>(gen() % 3);
        const Index N = 2 + static_cast<Index>(gen() % 3);
        const auto P = random_structured_polytope(gen, n, N, 1.2);
        const auto verdict = check_polytope(P);
        if (verdict.status == Status::Marginal) continue;
        ++done;
        const auto sampled = sample_polytope(P, 400, 2000);
        if (verdict.status == Status::RobustStable)
            CHECK(sampled.verdict != SampleVerdict::Violation);
        else
            CHECK(sampled.verdict != SampleVerdict::AllInside);
    }
}

TEST_CASE("polytope validation rejects malformed fields", "[polytope]") {
    RankOnePolytope P;
    P.B0 = Matrix::Identity(2, 2);
    P.b = Vector::Zero(2); // zero b
    P.C = {Vector::Zero(2)};
    CHECK_THROWS_AS(P.validate(), PreconditionError);

    RankOnePolytope Q;
    Q.B0 = Matrix::Identity(2, 2);
    Vector b2(2);
    b2 << 1.0, 0.0;
    Q.b = b2;
    Q.C = {};
    CHECK_THROWS_AS(Q.validate(), PreconditionError);

    RankOnePolytope R;
    R.B0 = Matrix::Identity(2, 2);
    R.b = b2;
    R.C = {Vector::Zero(3)}; // wrong length
    CHECK_THROWS_AS(R.validate(), DimensionError);
}
