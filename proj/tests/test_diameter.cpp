#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <ccgeo/diameter.hpp>

using namespace ccgeo;

namespace {
Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}
}  // namespace

TEST_CASE("safe radius on the euclidean plane") {
    auto S = builtin("euclidean2");
    Box W = Box::centered(Vec::Zero(2), Vec::Ones(2));
    // Operator norm of the identity frame is 1; C = 1.05.
    CHECK(safe_radius(S, Vec::Zero(2), W) == doctest::Approx(1.0 / 2.1).epsilon(1e-12));
    // Off-center: governed by the nearest face.
    CHECK(safe_radius(S, vec2(0.5, 0), W) == doctest::Approx(0.5 / 2.1).epsilon(1e-12));
    CHECK_THROWS_AS(safe_radius(S, vec2(2, 0), W), DegenerateBox);
}

TEST_CASE("safe radius on heisenberg matches corner maximization") {
    auto S = builtin("heisenberg");
    Box W = Box::centered(Vec::Zero(3), Vec::Ones(3));
    // Oracle: the frame operator norm is monotone in |x|, |y|; maximize over
    // a fine grid of the box.
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j) {
            Vec p(3);
            p << -1.0 + i / 20.0, -1.0 + j / 20.0, 0.0;
            Eigen::JacobiSVD<Mat> svd(S.frame_matrix_unchecked(p));
            worst = std::max(worst, svd.singularValues()[0]);
        }
    const double expected = 1.0 / (2.0 * 1.05 * worst);
    CHECK(safe_radius(S, Vec::Zero(3), W) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("certificate preconditions") {
    auto S = builtin("euclidean2");
    auto CF = build_calibration(S, Vec::Zero(2), 0.5);
    CHECK_THROWS_AS(ball_diameter_certificate_C11(S, CF, 1.0, Vec::Zero(2), 0.1, 0.1),
                    ConfigError);  // delta >= r
    CHECK_THROWS_AS(ball_diameter_certificate_C11(S, CF, 1.0, Vec::Zero(2), 0.1, -1.0),
                    ConfigError);
    CHECK_THROWS_AS(ball_diameter_certificate_C11(S, CF, 1.0, Vec::Zero(2), 10.0, 1e-3),
                    ConfigError);  // r beyond rbar/eps
}

TEST_CASE("euclidean C11 certificate is sharp") {
    auto S = builtin("euclidean2");
    auto CF = build_calibration(S, Vec::Zero(2), 0.5);
    auto rep = verify_calibration(CF, 2000, 3);
    auto crt = ball_diameter_certificate_C11(S, CF, rep.margin_s, Vec::Zero(2), 0.1, 1e-4);
    CHECK(crt.upper_bound == doctest::Approx(0.2));
    CHECK(crt.lower_bound >= 2.0 * (0.1 - 1e-4) * (1.0 - 1e-6));
    CHECK(crt.lower_bound / crt.upper_bound >= 0.998);
    CHECK((crt.q2 - crt.q1).norm() == doctest::Approx(2.0 * (0.1 - 1e-4)).epsilon(1e-9));
    CHECK(crt.budget < 1e-6);
}

TEST_CASE("heisenberg C11 certificate") {
    auto S = builtin("heisenberg");
    auto CF = build_calibration(S, Vec::Zero(3), 0.3);
    auto rep = verify_calibration(CF, 2000, 3);
    auto crt = ball_diameter_certificate_C11(S, CF, rep.margin_s, Vec::Zero(3), 0.05, 5e-5);
    CHECK(crt.lower_bound / crt.upper_bound >= 0.98);
    CHECK(crt.regime == Regularity::C11);
}

TEST_CASE("euclidean-as-C0 certificate") {
    // Euclidean structure run through the low-regularity pipeline: slacks
    // vanish, lower = 2(r - delta), ratio -> 1 as delta -> 0.
    auto S = builtin("euclidean2");
    auto QC = build_quasicalibration(S, Vec::Zero(2), 0.05);
    CHECK(QC.eps1 <= 1e-12);
    CHECK(QC.eps2 <= 1e-12);
    double prev_ratio = 0.0;
    for (double delta : {1e-2, 1e-3, 1e-4}) {
        auto crt = ball_diameter_certificate_C0(S, QC, Vec::Zero(2), 0.1, delta);
        CHECK(crt.lower_bound == doctest::Approx(2.0 * (0.1 - delta)).epsilon(1e-9));
        const double ratio = crt.lower_bound / crt.upper_bound;
        CHECK(ratio > prev_ratio);
        prev_ratio = ratio;
    }
    CHECK(prev_ratio >= 0.998);
}

TEST_CASE("grushin C0 certificate at the singular point") {
    auto S = builtin("grushin");
    auto QC = build_quasicalibration(S, Vec::Zero(2), 0.05);
    auto crt = ball_diameter_certificate_C0(S, QC, Vec::Zero(2), 0.05, 1e-4);
    // ratio >= (1 - eps^2)(1 - delta/r)/(1 + eps) with measured slacks 0:
    // effectively (1 - delta/r).
    CHECK(crt.lower_bound / crt.upper_bound >= 0.945);
    CHECK(crt.eps1 <= 0.05);
    CHECK(crt.eps2 <= 0.05);
}

TEST_CASE("duplicated line certificate agrees with the on-line distance") {
    auto S = builtin("duplicated_line");
    auto QC = build_quasicalibration(S, Vec::Zero(1), 0.05);
    const double r = 0.05, delta = 1e-4;
    auto crt = ball_diameter_certificate_C0(S, QC, Vec::Zero(1), r, delta);
    CHECK(crt.lower_bound == doctest::Approx(2.0 * (r - delta)).epsilon(1e-8));
    // Exact distance between the endpoints: |x| / sqrt(2) per unit of x.
    const double exact = (crt.q2[0] - crt.q1[0]) / std::sqrt(2.0);
    CHECK(crt.lower_bound <= exact + 1e-9);
    CHECK(crt.lower_bound >= exact - 1e-6);
}

TEST_CASE("euclidean sweep ratios") {
    auto S = builtin("euclidean2");
    auto sweep = diameter_sweep(S, Vec::Zero(2), {0.2, 0.1, 0.05}, Regularity::C11);
    CHECK(sweep.rows.size() == 18);  // 6 base points x 3 radii
    for (const auto& row : sweep.rows) CHECK(row.ratio >= 0.998);
    CHECK(sweep.margin_s <= 1.0 + 1e-6);
}

TEST_CASE("heisenberg sweep ratios improve as r shrinks") {
    auto S = builtin("heisenberg");
    auto sweep = diameter_sweep(S, Vec::Zero(3), {0.1, 0.05, 0.025}, Regularity::C11);
    for (const auto& row : sweep.rows) CHECK(row.ratio >= 0.98);
    // Rows come in per-base groups of decreasing radius; within the base
    // group the ratio must not degrade.
    for (size_t k = 0; k + 1 < sweep.rows.size(); ++k) {
        if (sweep.rows[k].base_index != sweep.rows[k + 1].base_index) continue;
        CHECK(sweep.rows[k + 1].ratio >= sweep.rows[k].ratio - 1e-9);
    }
}

TEST_CASE("flat_nonbracket sweep attains the diameter without brackets") {
    auto S = builtin("flat_nonbracket");
    auto sweep = diameter_sweep(S, Vec::Zero(3), {0.1, 0.05}, Regularity::C11);
    for (const auto& row : sweep.rows) CHECK(row.ratio >= 0.99);
}

TEST_CASE("C0 sweep on grushin") {
    auto S = builtin("grushin");
    auto sweep = diameter_sweep(S, Vec::Zero(2), {0.05, 0.025}, Regularity::C0);
    CHECK(sweep.eps1 <= 0.05);
    CHECK(sweep.eps2 <= 0.05);
    for (const auto& row : sweep.rows) CHECK(row.ratio >= 0.90);
}

TEST_CASE("C11 sweep refuses C0 structures") {
    auto S = builtin("grushin");
    CHECK_THROWS_AS(diameter_sweep(S, Vec::Zero(2), {0.05}, Regularity::C11), ConfigError);
    CHECK_THROWS_AS(diameter_sweep(S, Vec::Zero(2), {}, Regularity::C0), ConfigError);
}

TEST_CASE("sweep csv layout") {
    auto S = builtin("euclidean2");
    auto sweep = diameter_sweep(S, Vec::Zero(2), {0.1}, Regularity::C11);
    std::ostringstream os;
    write_sweep_csv(os, S.name, Regularity::C11, sweep);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "structure,regime,q,r,delta,lower,upper,ratio,budget");
    int rows = 0;
    while (std::getline(is, line)) {
        CHECK(line.substr(0, 11) == "euclidean2,");
        ++rows;
    }
    CHECK(rows == static_cast<int>(sweep.rows.size()));

    std::ostringstream js;
    write_sweep_reports_json(js, sweep);
    CHECK(js.str().find("\"reports\"") != std::string::npos);
}
