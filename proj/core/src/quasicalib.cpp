#include "ccgeo/quasicalib.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ccgeo/rng.hpp"

namespace ccgeo {

Vec minimal_norm_preimage(const SRStructure& S, const Vec& p, const Vec& v) {
    Mat A = evaluate_frame(S, p);
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vec h = Vec::Zero(S.m);
    const Vec& sv = svd.singularValues();
    if (sv.size() > 0 && sv[0] > 0.0) {
        Vec z = svd.matrixU().transpose() * v;
        for (int i = 0; i < sv.size(); ++i) z[i] = sv[i] > 1e-10 * sv[0] ? z[i] / sv[i] : 0.0;
        h = svd.matrixV() * z;
    }
    if ((A * h - v).norm() > 1e-8 * (1.0 + v.norm()))
        throw NotHorizontal(S.name + ": vector is not in the span of the frame at p");
    return h;
}

std::pair<double, double> measure_quasicalibration_bounds(const QuasiCalibration& QC,
                                                          const SRStructure& S,
                                                          const Box& U_test, int sample_count,
                                                          std::uint64_t seed) {
    const Vec dir = QC.hbar / QC.hbar.norm();
    double worst_norm = 0.0;
    double worst_dir = std::numeric_limits<double>::infinity();

    auto probe = [&](const Vec& q) {
        Mat A = S.frame_matrix_unchecked(q);
        Vec pullback = A.transpose() * QC.omega;  // (omega . X_1, ..., omega . X_m)
        worst_norm = std::max(worst_norm, pullback.norm());
        worst_dir = std::min(worst_dir, pullback.dot(dir));
    };

    // Corners and center always probed; the rest of the budget is seeded.
    probe(U_test.center());
    const int n = U_test.dim();
    const int corners = 1 << n;
    for (int c = 0; c < corners && c < 256; ++c) {
        Vec q(n);
        for (int i = 0; i < n; ++i) q[i] = (c >> i) & 1 ? U_test.max[i] : U_test.min[i];
        probe(q);
    }
    Rng rng = Rng(seed).fork(11);
    for (int s = 0; s < sample_count; ++s) probe(rng.uniform_in_box(U_test));

    const double eps1 = std::max(0.0, worst_norm - 1.0);
    const double eps2 = std::max(0.0, 1.0 - worst_dir);
    return {eps1, eps2};
}

QuasiCalibration build_quasicalibration(const SRStructure& S, const Vec& p, double target_eps,
                                        int sample_count, std::uint64_t seed) {
    if (!(target_eps > 0.0 && target_eps < 1.0))
        throw ConfigError("target_eps must lie in (0,1)");
    S.require_inside(p);
    Mat A = evaluate_frame(S, p);

    int pivot = -1;
    double best = 0.0;
    for (int i = 0; i < S.m; ++i) {
        const double nrm = A.col(i).norm();
        if (nrm > best) {
            best = nrm;
            pivot = i;
        }
    }
    if (pivot < 0 || best <= 1e-14)
        throw ZeroFrame(S.name + ": every frame field vanishes at p");

    QuasiCalibration QC;
    QC.p = p;
    QC.pivot = pivot + 1;
    QC.hbar = minimal_norm_preimage(S, p, A.col(pivot));
    QC.sample_count = sample_count;
    QC.seed = seed;

    // lambda = hbar^T / |hbar| satisfies <lambda, hbar> = |hbar| and
    // vanishes on hbar-perp (hence on ker A).
    Vec lambda = QC.hbar / QC.hbar.norm();
    // omega: minimal-norm solution of A^T omega = lambda (zero on the
    // orthogonal complement of the column space).
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    Vec z = svd.matrixV().transpose() * lambda;
    for (int i = 0; i < sv.size(); ++i) z[i] = sv[i] > 1e-10 * sv[0] ? z[i] / sv[i] : 0.0;
    QC.omega = svd.matrixU() * z;

    // Neighborhood: box centered at p, bisected until the slack targets hold.
    Vec half0(S.n);
    for (int i = 0; i < S.n; ++i)
        half0[i] = std::min(p[i] - S.domain.min[i], S.domain.max[i] - p[i]);
    if (half0.minCoeff() <= 0.0)
        throw DegenerateBox(S.name + ": p lies on the boundary of the domain box");

    double scale = 1.0;
    for (int round = 0; round <= 40; ++round) {
        Box U = Box::centered(p, scale * half0);
        auto [e1, e2] = measure_quasicalibration_bounds(QC, S, U, sample_count, seed);
        if (e1 <= target_eps && e2 <= target_eps * target_eps) {
            QC.U = U;
            QC.eps1 = e1;
            QC.eps2 = e2;
            return QC;
        }
        scale *= 0.5;
    }
    throw ShrinkExhausted(S.name + ": quasi-calibration neighborhood bisection exhausted");
}

C0Curve quasicalibrated_flow(const QuasiCalibration& QC, const SRStructure& S, const Vec& q,
                             double r, int steps_per_side) {
    if (!QC.U.contains(q, 1e-12))
        throw PointOutsideDomain(S.name + ": flow start outside the quasi-calibrated set U");
    const Vec dir = QC.hbar / QC.hbar.norm();
    auto field = [&](const Vec& x) -> Vec { return S.frame_matrix_unchecked(x) * dir; };
    auto rk4 = [&](const Vec& x, double h) -> Vec {
        Vec k1 = field(x);
        Vec k2 = field(x + 0.5 * h * k1);
        Vec k3 = field(x + 0.5 * h * k2);
        Vec k4 = field(x + h * k3);
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    const double h = r / steps_per_side;
    std::vector<Vec> fwd{q}, bwd{q};
    C0Curve curve;
    for (int dirn = -1; dirn <= 1; dirn += 2) {
        Vec x = q;
        for (int k = 0; k < steps_per_side; ++k) {
            Vec next = rk4(x, dirn * h);
            if (!next.allFinite()) throw NonFiniteState(S.name + ": non-finite C0 flow state");
            if (!S.domain.contains(next)) {
                curve.boundary_hit = true;
                break;
            }
            x = next;
            (dirn < 0 ? bwd : fwd).push_back(x);
        }
    }
    for (int k = static_cast<int>(bwd.size()) - 1; k >= 1; --k) {
        curve.times.push_back(-k * h);
        curve.points.push_back(bwd[k]);
    }
    for (size_t k = 0; k < fwd.size(); ++k) {
        curve.times.push_back(static_cast<double>(k) * h);
        curve.points.push_back(fwd[k]);
    }
    return curve;
}

void save_quasicalibration_json(const QuasiCalibration& QC, const SRStructure& S,
                                std::ostream& out) {
    nlohmann::json j;
    j["type"] = "quasi_calibration";
    j["structure"] = S.name;
    j["p"] = std::vector<double>(QC.p.data(), QC.p.data() + QC.p.size());
    j["pivot"] = QC.pivot;
    j["hbar"] = std::vector<double>(QC.hbar.data(), QC.hbar.data() + QC.hbar.size());
    j["omega"] = std::vector<double>(QC.omega.data(), QC.omega.data() + QC.omega.size());
    j["U"] = {{"min", std::vector<double>(QC.U.min.data(), QC.U.min.data() + QC.U.min.size())},
              {"max", std::vector<double>(QC.U.max.data(), QC.U.max.data() + QC.U.max.size())}};
    j["eps1"] = QC.eps1;
    j["eps2"] = QC.eps2;
    j["sample_count"] = QC.sample_count;
    j["seed"] = QC.seed;
    out << j.dump(1) << "\n";
}

QuasiCalibration load_quasicalibration_json(const SRStructure& S, std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("quasi-calibration file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("type").get<std::string>() != "quasi_calibration")
            throw ConfigError("not a quasi_calibration document");
        if (j.at("structure").get<std::string>() != S.name)
            throw ConfigError("quasi-calibration was built for structure '" +
                              j.at("structure").get<std::string>() + "', got '" + S.name + "'");
        QuasiCalibration QC;
        auto vec = [](const nlohmann::json& a) {
            auto v = a.get<std::vector<double>>();
            return Vec(Eigen::Map<const Vec>(v.data(), v.size()));
        };
        QC.p = vec(j.at("p"));
        QC.pivot = j.at("pivot").get<int>();
        QC.hbar = vec(j.at("hbar"));
        QC.omega = vec(j.at("omega"));
        QC.U = Box{vec(j.at("U").at("min")), vec(j.at("U").at("max"))};
        QC.eps1 = j.at("eps1").get<double>();
        QC.eps2 = j.at("eps2").get<double>();
        QC.sample_count = j.at("sample_count").get<int>();
        QC.seed = j.at("seed").get<std::uint64_t>();
        return QC;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("quasi-calibration file schema error: ") + e.what());
    }
}

}  // namespace ccgeo
