#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <ccgeo/quasicalib.hpp>

using namespace ccgeo;

TEST_CASE("least-norm control on the duplicated line") {
    auto S = builtin("duplicated_line");
    Vec v(1);
    v << 1.0;
    Vec h = minimal_norm_preimage(S, Vec::Zero(1), v);
    CHECK(std::abs(h[0] - 0.5) < 1e-12);
    CHECK(std::abs(h[1] - 0.5) < 1e-12);
    CHECK(std::abs(h.norm() - 1.0 / std::sqrt(2.0)) < 1e-12);

    // Brute-force oracle: the affine space of solutions is h = (t, 1-t);
    // minimize the norm over a dense grid of t.
    double best_norm = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    const int G = 1000000;
    for (int k = 0; k <= G; ++k) {
        const double t = -2.0 + 4.0 * k / G;
        const double nrm = std::hypot(t, 1.0 - t);
        if (nrm < best_norm) {
            best_norm = nrm;
            best_t = t;
        }
    }
    CHECK(std::abs(best_t - h[0]) <= 4.0 / G + 1e-12);
    CHECK(std::abs(best_norm - h.norm()) <= 1e-10);
}

TEST_CASE("preimage rejects non-horizontal vectors") {
    auto S = builtin("flat_nonbracket");
    CHECK_THROWS_AS(minimal_norm_preimage(S, Vec::Zero(3), Vec::Unit(3, 2)), NotHorizontal);
    // Horizontal vectors pass through exactly.
    Vec v(3);
    v << 0.3, -0.4, 0.0;
    Vec h = minimal_norm_preimage(S, Vec::Zero(3), v);
    CHECK(std::abs(h[0] - 0.3) < 1e-12);
    CHECK(std::abs(h[1] + 0.4) < 1e-12);
}

TEST_CASE("grushin quasi-calibration away from the singular line") {
    auto S = builtin("grushin");
    Vec p(2);
    p << 1.0, 0.0;
    auto QC = build_quasicalibration(S, p, 0.05);
    CHECK(QC.hbar.isApprox(Vec::Unit(2, 0), 1e-12));
    CHECK(QC.omega.isApprox(Vec::Unit(2, 0), 1e-12));
    // omega = dx kills the second column identically: zero slack even on a
    // large box.
    CHECK(QC.eps1 <= 1e-12);
    CHECK(QC.eps2 <= 1e-12);
}

TEST_CASE("grushin quasi-calibration at the singular point") {
    auto S = builtin("grushin");
    auto QC = build_quasicalibration(S, Vec::Zero(2), 0.05);
    CHECK(QC.pivot == 1);  // X2(0) = 0
    CHECK(QC.hbar.isApprox(Vec::Unit(2, 0), 1e-12));
    CHECK(QC.omega.isApprox(Vec::Unit(2, 0), 1e-12));
    CHECK(QC.eps1 <= 1e-12);
    CHECK(QC.eps2 <= 1e-12);
    CHECK(QC.U.contains(Vec::Zero(2)));
}

TEST_CASE("exact slack formula on a grushin strip") {
    auto S = builtin("grushin");
    Vec p(2);
    p << 1.0, 0.0;
    auto QC = build_quasicalibration(S, p, 0.05);
    Vec lo(2), hi(2);
    lo << 0.9, -0.1;
    hi << 1.1, 0.1;
    auto [e1, e2] = measure_quasicalibration_bounds(QC, S, Box{lo, hi}, 2000, 3);
    // <dx, X1> = 1 identically and <dx, X2> = 0: both slacks vanish exactly.
    CHECK(e1 <= 1e-14);
    CHECK(e2 <= 1e-14);
}

TEST_CASE("heisenberg slacks shrink with the box") {
    auto S = builtin("heisenberg");
    auto QC = build_quasicalibration(S, Vec::Zero(3), 0.2);
    double prev1 = std::numeric_limits<double>::infinity();
    double prev2 = std::numeric_limits<double>::infinity();
    Box U = QC.U;
    for (int round = 0; round < 4; ++round) {
        auto [e1, e2] = measure_quasicalibration_bounds(QC, S, U, 4000, 17);
        CHECK(e1 <= prev1 + 1e-12);
        CHECK(e2 <= prev2 + 1e-12);
        prev1 = e1;
        prev2 = e2;
        U = U.shrunk(0.5);
    }
    CHECK(prev1 <= 0.05);  // slack -> 0 by continuity
    CHECK(prev2 <= 0.05);
}

TEST_CASE("duplicated line flow moves at the minimal-norm speed") {
    auto S = builtin("duplicated_line");
    auto QC = build_quasicalibration(S, Vec::Zero(1), 0.05);
    CHECK(std::abs(QC.hbar.norm() - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(QC.omega[0] - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(QC.eps1 <= 1e-12);
    CHECK(QC.eps2 <= 1e-12);
    // Unit control (1/sqrt2, 1/sqrt2) gives chart speed sqrt(2).
    auto curve = quasicalibrated_flow(QC, S, Vec::Zero(1), 0.5);
    CHECK_FALSE(curve.boundary_hit);
    CHECK(curve.points.back()[0] == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-10));
    CHECK(curve.points.front()[0] == doctest::Approx(-0.5 * std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("grushin flow from the origin runs along the x-axis") {
    auto S = builtin("grushin");
    auto QC = build_quasicalibration(S, Vec::Zero(2), 0.05);
    auto curve = quasicalibrated_flow(QC, S, Vec::Zero(2), 0.3);
    for (const Vec& pt : curve.points) CHECK(std::abs(pt[1]) < 1e-12);
    CHECK(curve.points.back()[0] == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("target slack outside (0,1) is rejected") {
    auto S = builtin("grushin");
    CHECK_THROWS_AS(build_quasicalibration(S, Vec::Zero(2), 0.0), ConfigError);
    CHECK_THROWS_AS(build_quasicalibration(S, Vec::Zero(2), 1.5), ConfigError);
}

TEST_CASE("quasi-calibrations serialize and reload") {
    auto S = builtin("grushin");
    auto QC = build_quasicalibration(S, Vec::Zero(2), 0.05);
    std::stringstream buf;
    save_quasicalibration_json(QC, S, buf);
    auto QC2 = load_quasicalibration_json(S, buf);
    CHECK(QC2.pivot == QC.pivot);
    CHECK(QC2.hbar.isApprox(QC.hbar, 0.0));
    CHECK(QC2.omega.isApprox(QC.omega, 0.0));
    CHECK(QC2.U.min.isApprox(QC.U.min, 0.0));
    CHECK(QC2.eps1 == QC.eps1);

    auto other = builtin("duplicated_line");
    std::stringstream buf2;
    save_quasicalibration_json(QC, S, buf2);
    CHECK_THROWS_AS(load_quasicalibration_json(other, buf2), ConfigError);
    std::stringstream junk("{]");
    CHECK_THROWS_AS(load_quasicalibration_json(S, junk), ConfigError);
}
