#include "ccgeo/diameter.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ccgeo/io.hpp"
#include "ccgeo/rng.hpp"

namespace ccgeo {

double safe_radius(const SRStructure& S, const Vec& q, const Box& W_box) {
    if (!W_box.contains(q))
        throw DegenerateBox(S.name + ": q outside the box passed to safe_radius");
    const double dist = W_box.boundary_distance(q);
    if (!(dist > 0.0)) throw DegenerateBox(S.name + ": q lies on the boundary of W");

    double C = 0.0;
    auto probe = [&](const Vec& x) {
        Eigen::JacobiSVD<Mat> svd(S.frame_matrix_unchecked(x));
        C = std::max(C, svd.singularValues()[0]);
    };
    // Dense sample: regular grid plus low-discrepancy filler.
    const int n = W_box.dim();
    const int per_axis = n <= 2 ? 17 : 9;
    std::vector<int> idx(n, 0);
    while (true) {
        Vec x(n);
        for (int i = 0; i < n; ++i)
            x[i] = W_box.min[i] + (W_box.max[i] - W_box.min[i]) * idx[i] / double(per_axis - 1);
        probe(x);
        int d = 0;
        while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
        if (d == n) break;
    }
    for (int s = 1; s <= 400; ++s) probe(halton_in_box(static_cast<std::uint64_t>(s), W_box));

    C *= 1.05;
    return dist / (2.0 * C);
}

Box calibrated_safe_box(const CalibrationField& CF) {
    const int n = CF.dim();
    double f = 0.8;
    for (int attempt = 0; attempt < 5; ++attempt, f *= 0.8) {
        Vec half(n);
        half[0] = f * CF.eps;
        for (int d = 0; d < n - 1; ++d) half[1 + d] = f * CF.uprime_half[d];
        Box B = Box::centered(Vec::Zero(n), half);
        bool ok = true;
        const int corners = 1 << n;
        for (int c = 0; c < corners && ok; ++c) {
            Vec y(n);
            for (int i = 0; i < n; ++i) y[i] = (c >> i) & 1 ? B.max[i] : B.min[i];
            try {
                evaluate_calibration(CF, CF.chart.to_original(y));
            } catch (const OutsideCalibratedSet&) {
                ok = false;
            }
        }
        if (ok) return B;
    }
    throw ConstructionFailed("no adapted box could be certified inside W");
}

BallDiameterReport ball_diameter_certificate_C11(const SRStructure& S,
                                                 const CalibrationField& CF, double margin_s,
                                                 const Vec& q, double r, double delta) {
    if (!(delta > 0.0 && delta < r))
        throw ConfigError("certificate requires 0 < delta < r");
    if (!(margin_s > 0.0)) throw ConfigError("calibration margin must be positive");

    Box W_ad = calibrated_safe_box(CF);
    const Vec y_q = CF.chart.to_adapted(q);
    const double rbar = safe_radius(CF.chart.adapted, y_q, W_ad);
    if (!(r < std::min(rbar, CF.eps)))
        throw ConfigError("certificate requires r < min(rbar, eps); got r=" + fmt17(r) +
                          ", rbar=" + fmt17(rbar) + ", eps=" + fmt17(CF.eps));

    CalibrationEval at_q = evaluate_calibration(CF, q);
    const double span = r - delta;
    if (std::abs(at_q.t) + span > CF.eps)
        throw ConfigError("flow interval through q leaves (-eps, eps)");

    const Vec y1 = CF.flow(at_q.t - span, at_q.xprime).q;
    const Vec y2 = CF.flow(at_q.t + span, at_q.xprime).q;

    BallDiameterReport rep;
    rep.structure = S.name;
    rep.q = q;
    rep.r = r;
    rep.delta = delta;
    rep.q1 = CF.chart.to_original(y1);
    rep.q2 = CF.chart.to_original(y2);
    rep.regime = Regularity::C11;
    rep.margin_s = margin_s;
    rep.rbar = rbar;
    rep.upper_bound = 2.0 * r;

    PotentialResult phi1 = calibration_potential(CF, rep.q1);
    PotentialResult phi2 = calibration_potential(CF, rep.q2);
    rep.lower_bound = std::max(0.0, std::abs(phi2.value - phi1.value)) / margin_s;
    rep.budget = phi1.path_error + phi2.path_error + 2e-8 +
                 10.0 * CF.settings.newton_tol + 2.0 * r * CF.ham_invariant_err;
    return rep;
}

BallDiameterReport ball_diameter_certificate_C0(const SRStructure& S,
                                                const QuasiCalibration& QC, const Vec& q,
                                                double r, double delta) {
    if (!(delta > 0.0 && delta < r))
        throw ConfigError("certificate requires 0 < delta < r");
    if (!QC.U.contains(q)) throw PointOutsideDomain(S.name + ": q outside QC.U");
    const double rbar = safe_radius(S, q, QC.U);
    if (!(r < rbar))
        throw ConfigError("certificate requires r < rbar; got r=" + fmt17(r) +
                          ", rbar=" + fmt17(rbar));

    const double span = r - delta;
    C0Curve gamma = quasicalibrated_flow(QC, S, q, span);
    if (gamma.boundary_hit)
        throw ConstructionFailed(S.name + ": quasi-calibrated flow left the domain box");

    BallDiameterReport rep;
    rep.structure = S.name;
    rep.q = q;
    rep.r = r;
    rep.delta = delta;
    rep.q1 = gamma.points.front();
    rep.q2 = gamma.points.back();
    rep.regime = Regularity::C0;
    rep.eps1 = QC.eps1;
    rep.eps2 = QC.eps2;
    rep.rbar = rbar;
    rep.upper_bound = 2.0 * r;
    // omega is constant, so the curve integral is exact up to the flow error.
    const double omega_integral = QC.omega.dot(rep.q2 - rep.q1);
    rep.lower_bound = std::max(0.0, omega_integral) / (1.0 + QC.eps1);
    rep.budget = 1e-8 * (1.0 + 2.0 * r);
    return rep;
}

SweepResult diameter_sweep(const SRStructure& S, const Vec& q, const std::vector<double>& radii,
                           Regularity regime, const SweepOptions& opts) {
    if (radii.empty()) throw ConfigError("sweep needs at least one radius");
    const double r_max = *std::max_element(radii.begin(), radii.end());
    const double r_min = *std::min_element(radii.begin(), radii.end());

    SweepResult sweep;
    Rng rng(opts.seed);

    auto add_row = [&](int base_index, const BallDiameterReport& rep, double check_upper) {
        SweepRow row;
        row.base_index = base_index;
        row.base = rep.q;
        row.r = rep.r;
        row.delta = rep.delta;
        row.lower = rep.lower_bound;
        row.upper = rep.upper_bound;
        row.ratio = rep.lower_bound / rep.upper_bound;
        row.budget = rep.budget;
        row.check_upper = check_upper;
        sweep.rows.push_back(row);
        sweep.reports.push_back(rep);
    };

    if (regime == Regularity::C11) {
        if (S.regularity != Regularity::C11)
            throw ConfigError(S.name + ": C11 certificates require a C11 structure");
        AdaptedChart probe = adapt_chart(S, q);
        const double R = probe.adapted.domain.min_half_width();
        const double eps = std::min(0.9 * R, std::max(0.25 * R, 3.0 * r_max));
        if (!(r_max < eps)) throw ConfigError("largest radius does not fit inside eps");
        CalibrationField CF = build_calibration(S, q, eps);
        CalibrationReport rep = verify_calibration(CF, opts.verify_samples, opts.seed);
        sweep.margin_s = rep.margin_s;

        std::vector<Vec> bases{q};
        const double rho = 0.3 * r_min;
        for (int j = 0; j < opts.cloud_points; ++j) {
            Rng rr = rng.fork(300 + j);
            Vec y = rho * rr.on_sphere(S.n);
            bases.push_back(CF.chart.to_original(y));
        }
        for (size_t b = 0; b < bases.size(); ++b) {
            for (double r : radii) {
                const double delta = r * opts.delta_fraction;
                BallDiameterReport crt =
                    ball_diameter_certificate_C11(S, CF, rep.margin_s, bases[b], r, delta);
                double check = std::numeric_limits<double>::quiet_NaN();
                if (opts.crosscheck && b == 0) {
                    DistanceEstimate est = distance_upper(S, crt.q1, crt.q2);
                    if (est.status == DistanceStatus::Finite) check = est.upper;
                }
                add_row(static_cast<int>(b), crt, check);
            }
        }
    } else {
        QuasiCalibration QC =
            build_quasicalibration(S, q, opts.target_eps, 4000, opts.seed);
        sweep.eps1 = QC.eps1;
        sweep.eps2 = QC.eps2;

        std::vector<Vec> bases{q};
        const double rho = 0.3 * r_min;
        for (int j = 0; j < opts.cloud_points; ++j) {
            Rng rr = rng.fork(300 + j);
            Vec cand = q + rho * rr.on_sphere(S.n);
            if (QC.U.shrunk(0.9).contains(cand)) bases.push_back(cand);
        }
        for (size_t b = 0; b < bases.size(); ++b) {
            for (double r : radii) {
                const double delta = r * opts.delta_fraction;
                BallDiameterReport crt = ball_diameter_certificate_C0(S, QC, bases[b], r, delta);
                double check = std::numeric_limits<double>::quiet_NaN();
                if (opts.crosscheck && b == 0) {
                    try {
                        OracleResult orc =
                            distance_oracle_graph(S, crt.q1, crt.q2, r / 4.0, 8.0 * r);
                        if (orc.reachable) check = orc.dist;
                    } catch (const CapExceeded&) {
                    }
                }
                add_row(static_cast<int>(b), crt, check);
            }
        }
    }
    return sweep;
}

namespace {

std::string point_str(const Vec& v) {
    std::string s;
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ";";
        s += fmt17(v[i]);
    }
    return s;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::string& structure, Regularity regime,
                     const SweepResult& sweep) {
    out << "structure,regime,q,r,delta,lower,upper,ratio,budget\n";
    for (const SweepRow& row : sweep.rows) {
        out << structure << "," << to_string(regime) << "," << point_str(row.base) << ","
            << fmt17(row.r) << "," << fmt17(row.delta) << "," << fmt17(row.lower) << ","
            << fmt17(row.upper) << "," << fmt17(row.ratio) << "," << fmt17(row.budget) << "\n";
    }
}

void write_sweep_reports_json(std::ostream& out, const SweepResult& sweep) {
    nlohmann::json j;
    j["margin_s"] = sweep.margin_s;
    j["eps1"] = sweep.eps1;
    j["eps2"] = sweep.eps2;
    j["reports"] = nlohmann::json::array();
    for (const BallDiameterReport& rep : sweep.reports) {
        nlohmann::json r;
        r["structure"] = rep.structure;
        r["q"] = std::vector<double>(rep.q.data(), rep.q.data() + rep.q.size());
        r["r"] = rep.r;
        r["delta"] = rep.delta;
        r["q1"] = std::vector<double>(rep.q1.data(), rep.q1.data() + rep.q1.size());
        r["q2"] = std::vector<double>(rep.q2.data(), rep.q2.data() + rep.q2.size());
        r["lower_bound"] = rep.lower_bound;
        r["upper_bound"] = rep.upper_bound;
        r["margin_s"] = rep.margin_s;
        r["eps1"] = rep.eps1;
        r["eps2"] = rep.eps2;
        r["rbar"] = rep.rbar;
        r["regime"] = to_string(rep.regime);
        r["budget"] = rep.budget;
        j["reports"].push_back(std::move(r));
    }
    out << j.dump(1) << "\n";
}

}  // namespace ccgeo
