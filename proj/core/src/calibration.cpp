#include "ccgeo/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ccgeo/rng.hpp"

namespace ccgeo {

namespace {

double inf_operator_norm(const Mat& A) {
    double r = 0.0;
    for (int i = 0; i < A.rows(); ++i) r = std::max(r, A.row(i).cwiseAbs().sum());
    return r;
}

}  // namespace

AdaptedChart adapt_chart(const SRStructure& S, const Vec& p) {
    if (S.regularity != Regularity::C11)
        throw ConstructionFailed(S.name + ": adapted charts require a C11 structure");
    if (S.n < 2) throw ConstructionFailed(S.name + ": adapted charts require n >= 2");
    S.require_inside(p);
    Mat A = S.frame_matrix_unchecked(p);
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    if (sv.size() < S.m || sv[S.m - 1] <= 1e-9 * sv[0])
        throw RankDeficient(S.name + ": frame rank below m at the base point");

    // B maps e_i -> X_i(p) for i <= m, completed orthogonally; M = B^{-1}.
    Mat B(S.n, S.n);
    B.leftCols(S.m) = A;
    B.rightCols(S.n - S.m) = svd.matrixU().rightCols(S.n - S.m);
    Mat M = B.inverse();

    AdaptedChart chart;
    chart.base = p;
    chart.M = M;
    chart.Minv = B;
    chart.original = S;

    SRStructure T;
    T.name = S.name + "__adapted";
    T.n = S.n;
    T.m = S.m;
    T.regularity = S.regularity;
    const double dinf = [&] {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < S.n; ++i)
            d = std::min(d, std::min(p[i] - S.domain.min[i], S.domain.max[i] - p[i]));
        return d;
    }();
    const double R = dinf / std::max(inf_operator_norm(B), 1e-300);
    if (!(R > 0.0))
        throw ConstructionFailed(S.name + ": base point lies on the domain boundary");
    T.domain = Box::cube(S.n, R);

    SRStructure orig = S;
    Vec base = p;
    Mat Minv = B;
    for (int i = 0; i < S.m; ++i) {
        T.frame.push_back(FrameField{
            i + 1,
            [orig, i, base, M, Minv](const Vec& y) -> Vec {
                return M * orig.frame[i].evaluate(base + Minv * y);
            },
            [orig, i, base, M, Minv](const Vec& y) -> Mat {
                return M * orig.field_jacobian(i, base + Minv * y) * Minv;
            }});
    }
    chart.adapted = std::move(T);
    return chart;
}

Vec seed_covector(const SRStructure& adapted, const Vec& xprime, double tol_seed) {
    const int n = adapted.n;
    Vec q = Vec::Zero(n);
    q.tail(n - 1) = xprime;
    Mat A = adapted.frame_matrix_unchecked(q);
    double s = 0.0;
    for (int i = 0; i < adapted.m; ++i) s += A(0, i) * A(0, i);
    if (s <= tol_seed)
        throw SeedDegenerate(adapted.name +
                             ": first frame components vanish on the seed hyperplane");
    Vec xi = Vec::Zero(n);
    xi[0] = 1.0 / std::sqrt(s);
    return xi;
}

int CalibrationField::xprime_count() const {
    int c = 1;
    for (int d = 0; d < xprime_dims(); ++d) c *= grid_res;
    return c;
}

Vec CalibrationField::xprime_at(int xp) const {
    const int nd = xprime_dims();
    Vec x(nd);
    for (int d = 0; d < nd; ++d) {
        int i = xp % grid_res;
        xp /= grid_res;
        x[d] = grid_res == 1 ? 0.0
                             : uprime_half[d] * (-1.0 + 2.0 * i / double(grid_res - 1));
    }
    return x;
}

double CalibrationField::time_at(int ti) const {
    const int half = (time_samples - 1) / 2;
    return (ti - half) * table_dt();
}

CotangentState CalibrationField::flow(double t, const Vec& xprime) const {
    const SRStructure& A = chart.adapted;
    Vec q0 = Vec::Zero(A.n);
    q0.tail(A.n - 1) = xprime;
    CotangentState st{q0, seed_covector(A, xprime, settings.seed_tol)};
    if (t == 0.0) return st;
    const double h_base = table_dt() / settings.substeps;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / h_base)));
    const double h = t / steps;
    for (int k = 0; k < steps; ++k) st = rk4_hamiltonian_step(A, st, h);
    return st;
}

namespace {

struct BuildDiag {
    bool ok = true;
    std::string reason;
    double ham_err = 0.0;
    double min_det = std::numeric_limits<double>::infinity();
};

// Multi-index decode matching CalibrationField::xprime_at.
std::vector<int> decode_xp(int xp, int nd, int res) {
    std::vector<int> idx(nd);
    for (int d = 0; d < nd; ++d) {
        idx[d] = xp % res;
        xp /= res;
    }
    return idx;
}

BuildDiag fill_tables(CalibrationField& CF) {
    const SRStructure& A = CF.chart.adapted;
    const int n = A.n;
    const int half = (CF.time_samples - 1) / 2;
    const double dt = CF.table_dt();
    const int nxp = CF.xprime_count();
    BuildDiag diag;

    CF.Q_table.assign(static_cast<size_t>(nxp) * CF.time_samples, Vec());
    CF.Lam_table.assign(static_cast<size_t>(nxp) * CF.time_samples, Vec());

    for (int xp = 0; xp < nxp; ++xp) {
        Vec xprime = CF.xprime_at(xp);
        Vec q0 = Vec::Zero(n);
        q0.tail(n - 1) = xprime;
        if (!A.domain.contains(q0)) {
            diag.ok = false;
            diag.reason = "seed hyperplane leaves the chart box";
            return diag;
        }
        Vec xi = seed_covector(A, xprime, CF.settings.seed_tol);
        CotangentState center{q0, xi};
        CF.Q_table[CF.node(xp, half)] = center.q;
        CF.Lam_table[CF.node(xp, half)] = center.lam;

        for (int dir = -1; dir <= 1; dir += 2) {
            CotangentState st = center;
            for (int s = 1; s <= half; ++s) {
                for (int k = 0; k < CF.settings.substeps; ++k)
                    st = rk4_hamiltonian_step(A, st, dir * dt / CF.settings.substeps);
                if (!st.q.allFinite() || !st.lam.allFinite())
                    throw NonFiniteState(A.name + ": non-finite state in calibration flow");
                if (!A.domain.contains(st.q)) {
                    diag.ok = false;
                    diag.reason = "flow leaves the chart box before eps";
                    return diag;
                }
                const int ti = half + dir * s;
                CF.Q_table[CF.node(xp, ti)] = st.q;
                CF.Lam_table[CF.node(xp, ti)] = st.lam;
            }
        }
    }

    // Conservation check: sum_i <Lam, X_i(Q)>^2 = 1 at every node.
    for (int xp = 0; xp < nxp; ++xp) {
        for (int ti = 0; ti < CF.time_samples; ++ti) {
            const int id = CF.node(xp, ti);
            Mat F = A.frame_matrix_unchecked(CF.Q_table[id]);
            double s = 0.0;
            for (int i = 0; i < A.m; ++i) {
                double hi = CF.Lam_table[id].dot(F.col(i));
                s += hi * hi;
            }
            diag.ham_err = std::max(diag.ham_err, std::abs(s - 1.0));
        }
    }
    if (diag.ham_err > CF.settings.ham_tol) {
        diag.ok = false;
        diag.reason = "Hamiltonian conservation violated on the flow table";
        return diag;
    }

    // |det DQ| lower bound via finite differences on the table.
    const int nd = CF.xprime_dims();
    std::vector<int> stride(nd);
    for (int d = 0; d < nd; ++d) stride[d] = (d == 0) ? 1 : stride[d - 1] * CF.grid_res;
    for (int xp = 0; xp < nxp; ++xp) {
        auto idx = decode_xp(xp, nd, CF.grid_res);
        for (int ti = 0; ti < CF.time_samples; ++ti) {
            Mat DQ(n, n);
            {  // time column
                int lo = std::max(0, ti - 1), hi = std::min(CF.time_samples - 1, ti + 1);
                DQ.col(0) =
                    (CF.Q_table[CF.node(xp, hi)] - CF.Q_table[CF.node(xp, lo)]) /
                    ((hi - lo) * dt);
            }
            for (int d = 0; d < nd; ++d) {
                if (CF.grid_res < 2) {
                    DQ.col(1 + d) = Vec::Unit(n, 1 + d);
                    continue;
                }
                const double du = 2.0 * CF.uprime_half[d] / (CF.grid_res - 1);
                int lo = std::max(0, idx[d] - 1), hi = std::min(CF.grid_res - 1, idx[d] + 1);
                int xplo = xp + (lo - idx[d]) * stride[d];
                int xphi = xp + (hi - idx[d]) * stride[d];
                DQ.col(1 + d) =
                    (CF.Q_table[CF.node(xphi, ti)] - CF.Q_table[CF.node(xplo, ti)]) /
                    ((hi - lo) * du);
            }
            diag.min_det = std::min(diag.min_det, std::abs(DQ.determinant()));
        }
    }
    if (diag.min_det < CF.settings.jac_lower_bound) {
        diag.ok = false;
        diag.reason = "Jacobian determinant below the injectivity bound";
        return diag;
    }

    // Coarse collision scan: far-apart grid nodes must not land on top of
    // each other in the image.
    {
        double min_spacing = dt;
        for (int d = 0; d < nd; ++d)
            if (CF.grid_res > 1)
                min_spacing = std::min(min_spacing, 2.0 * CF.uprime_half[d] / (CF.grid_res - 1));
        const double sep = 0.35 * min_spacing * diag.min_det;
        std::unordered_map<std::string, std::vector<int>> cells;
        auto cell_key = [&](const Vec& qv) {
            std::string key;
            for (int i = 0; i < n; ++i)
                key += std::to_string(static_cast<long long>(std::floor(qv[i] / sep))) + ",";
            return key;
        };
        for (int xp = 0; xp < nxp; ++xp) {
            auto idx2 = decode_xp(xp, nd, CF.grid_res);
            for (int ti = 0; ti < CF.time_samples; ++ti) {
                const int id = CF.node(xp, ti);
                auto& bucket = cells[cell_key(CF.Q_table[id])];
                for (int other : bucket) {
                    const int oxp = other / CF.time_samples, oti = other % CF.time_samples;
                    auto oidx = decode_xp(oxp, nd, CF.grid_res);
                    int cheb = std::abs(ti - oti);
                    for (int d = 0; d < nd; ++d)
                        cheb = std::max(cheb, std::abs(idx2[d] - oidx[d]));
                    if (cheb > 3 &&
                        (CF.Q_table[id] - CF.Q_table[other]).norm() < sep) {
                        diag.ok = false;
                        diag.reason = "grid-image collision (injectivity suspect)";
                        return diag;
                    }
                }
                bucket.push_back(id);
            }
        }
    }
    return diag;
}

}  // namespace

CalibrationField build_calibration(const SRStructure& S, const Vec& p, double eps, int grid_res,
                                   CalibrationSettings settings) {
    AdaptedChart chart = adapt_chart(S, p);
    const double R = chart.adapted.domain.min_half_width();

    CalibrationField CF;
    CF.chart = chart;
    CF.settings = settings;
    CF.eps = eps > 0.0 ? eps : 0.25 * R;
    CF.grid_res = grid_res > 0 ? grid_res : 17;
    CF.time_samples = 65;
    CF.uprime_half = Vec::Constant(S.n - 1, 0.25 * R);
    // An oversized requested eps cannot fit inside the chart box at all;
    // clamp before the shrink loop so the rounds are spent on geometry.
    CF.eps = std::min(CF.eps, 0.95 * R);

    std::string last_reason;
    for (int round = 0; round <= settings.max_shrink_rounds; ++round) {
        BuildDiag diag;
        try {
            diag = fill_tables(CF);
        } catch (const SeedDegenerate&) {
            diag.ok = false;
            diag.reason = "seed covector degenerate on U'";
        }
        if (diag.ok) {
            CF.ham_invariant_err = diag.ham_err;
            CF.min_abs_detDQ = diag.min_det;
            return CF;
        }
        last_reason = diag.reason;
        // Shrink policy: halve eps first, then shrink U', alternately.
        if (round % 2 == 0)
            CF.eps *= 0.5;
        else
            CF.uprime_half *= 0.5;
    }
    throw ConstructionFailed(S.name + ": calibration shrink rounds exhausted (" + last_reason +
                             ")");
}

CalibrationEval evaluate_calibration(const CalibrationField& CF, const Vec& x) {
    const int n = CF.dim();
    const Vec y = CF.chart.to_adapted(x);
    const double scale = 1.0 + y.norm();

    // Closest table nodes as Newton starting points.
    std::vector<std::pair<double, int>> best;
    for (int id = 0; id < static_cast<int>(CF.Q_table.size()); ++id)
        best.emplace_back((CF.Q_table[id] - y).squaredNorm(), id);
    std::partial_sort(best.begin(), best.begin() + std::min<size_t>(4, best.size()),
                      best.end());

    const double tol = CF.settings.newton_tol * scale;
    for (size_t c = 0; c < std::min<size_t>(4, best.size()); ++c) {
        const int id = best[c].second;
        const int xp = id / CF.time_samples, ti = id % CF.time_samples;
        Vec u(n);
        u[0] = CF.time_at(ti);
        u.tail(n - 1) = CF.xprime_at(xp);

        auto flow_q = [&](const Vec& uu) { return CF.flow(uu[0], uu.tail(n - 1)).q; };
        Vec F = flow_q(u) - y;
        bool converged = false;
        int it = 0;
        for (; it < CF.settings.newton_max_iter && !converged; ++it) {
            if (F.norm() <= tol) {
                converged = true;
                break;
            }
            Mat J(n, n);
            const double hJ = 1e-6 * (1.0 + u.norm());
            for (int j = 0; j < n; ++j) {
                Vec up = u, um = u;
                up[j] += hJ;
                um[j] -= hJ;
                J.col(j) = (flow_q(up) - flow_q(um)) / (2.0 * hJ);
            }
            Vec du = J.partialPivLu().solve(-F);
            double alpha = 1.0;
            Vec u_new = u + du;
            Vec F_new;
            bool stepped = false;
            for (int bt = 0; bt < 8; ++bt) {
                try {
                    F_new = flow_q(u_new) - y;
                } catch (const std::exception&) {
                    alpha *= 0.5;
                    u_new = u + alpha * du;
                    continue;
                }
                if (F_new.norm() < F.norm() || alpha < 0.1) {
                    stepped = true;
                    break;
                }
                alpha *= 0.5;
                u_new = u + alpha * du;
            }
            if (!stepped) break;
            u = u_new;
            F = F_new;
        }
        if (!(F.norm() <= tol)) continue;
        // Reject preimages outside the grid hull: they signal x outside W.
        const double slack = 1e-7 * scale;
        if (std::abs(u[0]) > CF.eps + slack) continue;
        bool inside = true;
        for (int d = 0; d < n - 1; ++d)
            if (std::abs(u[1 + d]) > CF.uprime_half[d] + slack) inside = false;
        if (!inside) continue;

        CotangentState st = CF.flow(u[0], u.tail(n - 1));
        CalibrationEval ev;
        ev.t = u[0];
        ev.xprime = u.tail(n - 1);
        ev.x_adapted = y;
        ev.lambda_adapted = st.lam;
        ev.lambda_original = CF.chart.covector_to_original(st.lam);
        ev.newton_iters = it;
        ev.residual = F.norm();
        return ev;
    }
    throw OutsideCalibratedSet("point is outside the calibrated neighborhood W");
}

DirectionEval calibrated_direction(const CalibrationField& CF, const Vec& x) {
    CalibrationEval ev = evaluate_calibration(CF, x);
    const SRStructure& S = CF.chart.original;
    Mat A = evaluate_frame(S, x);
    DirectionEval out;
    out.lambda = ev.lambda_original;
    out.controls = Vec(S.m);
    out.Y = Vec::Zero(S.n);
    for (int i = 0; i < S.m; ++i) {
        out.controls[i] = ev.lambda_original.dot(A.col(i));
        out.Y += out.controls[i] * A.col(i);
    }
    return out;
}

CalibrationReport verify_calibration(const CalibrationField& CF, int sample_count,
                                     std::uint64_t seed) {
    const SRStructure& A = CF.chart.adapted;
    const int n = CF.dim();
    CalibrationReport rep;
    rep.sample_count = sample_count;
    rep.seed = seed;

    Rng rng = Rng(seed).fork(101);
    for (int s = 0; s < sample_count; ++s) {
        const double t = rng.uniform(-CF.eps, CF.eps);
        Vec xprime(n - 1);
        for (int d = 0; d < n - 1; ++d)
            xprime[d] = rng.uniform(-CF.uprime_half[d], CF.uprime_half[d]);
        CotangentState st = CF.flow(t, xprime);
        Mat F = A.frame_matrix_unchecked(st.q);
        double s2 = 0.0;
        for (int i = 0; i < A.m; ++i) {
            const double hi = st.lam.dot(F.col(i));
            s2 += hi * hi;
        }
        // sup over unit controls of <Lam, sum h_i X_i> is the control norm.
        rep.margin_s = std::max(rep.margin_s, std::sqrt(s2));
        rep.unit_error = std::max(rep.unit_error, std::abs(s2 - 1.0));
    }

    // Exactness: loop integrals of Lambda over small closed polygons in W,
    // trapezoidal quadrature at three refinements.
    Rng lrng = Rng(seed).fork(202);
    const int refinements[3] = {8, 16, 32};
    std::vector<double> residuals(3, 0.0), steps(3, 0.0);
    const int n_loops = 2;
    for (int loop = 0; loop < n_loops; ++loop) {
        const double t0 = lrng.uniform(-0.5 * CF.eps, 0.5 * CF.eps);
        Vec x0(n - 1);
        for (int d = 0; d < n - 1; ++d)
            x0[d] = lrng.uniform(-0.5 * CF.uprime_half[d], 0.5 * CF.uprime_half[d]);
        Vec yc = CF.flow(t0, x0).q;
        Vec v1 = lrng.on_sphere(n);
        Vec v2 = lrng.on_sphere(n);
        v2 -= v2.dot(v1) * v1;
        if (v2.norm() < 1e-6) v2 = Vec::Unit(n, (loop + 1) % n);
        v2.normalize();
        double rho = 0.08 * std::min(CF.eps, CF.uprime_half.minCoeff());

        for (int attempt = 0; attempt < 6; ++attempt) {
            std::vector<Vec> verts;
            for (int k = 0; k < 3; ++k) {
                const double a = 2.0 * M_PI * k / 3.0;
                verts.push_back(yc + rho * (std::cos(a) * v1 + std::sin(a) * v2));
            }
            bool ok = true;
            std::vector<double> res(3, 0.0), eta(3, 0.0);
            try {
                for (int rlevel = 0; rlevel < 3; ++rlevel) {
                    const int nq = refinements[rlevel];
                    double integral = 0.0, perimeter = 0.0;
                    for (int side = 0; side < 3; ++side) {
                        const Vec& a0 = verts[side];
                        const Vec& a1 = verts[(side + 1) % 3];
                        const Vec dy = (a1 - a0) / nq;
                        perimeter += (a1 - a0).norm();
                        Vec lam_prev =
                            evaluate_calibration(CF, CF.chart.to_original(a0)).lambda_adapted;
                        for (int k = 1; k <= nq; ++k) {
                            Vec yk = a0 + (a1 - a0) * (double(k) / nq);
                            Vec lam =
                                evaluate_calibration(CF, CF.chart.to_original(yk))
                                    .lambda_adapted;
                            integral += 0.5 * (lam_prev + lam).dot(dy);
                            lam_prev = lam;
                        }
                    }
                    res[rlevel] = std::abs(integral);
                    eta[rlevel] = perimeter / (3.0 * nq);
                }
            } catch (const OutsideCalibratedSet&) {
                ok = false;
            }
            if (ok) {
                for (int r = 0; r < 3; ++r) {
                    residuals[r] = std::max(residuals[r], res[r]);
                    steps[r] = std::max(steps[r], eta[r]);
                }
                break;
            }
            rho *= 0.5;
        }
    }
    rep.loop_residuals = residuals;
    rep.loop_steps = steps;
    return rep;
}

GeodesicCertificate minimizing_geodesic_through(const CalibrationField& CF, double r,
                                               int steps_per_side) {
    if (!(r > 0.0) || r >= CF.eps)
        throw ConstructionFailed("minimizing_geodesic_through requires 0 < r < eps");
    const SRStructure& A = CF.chart.adapted;
    Vec x0 = Vec::Zero(A.n - 1);
    CotangentState center{Vec::Zero(A.n), seed_covector(A, x0, CF.settings.seed_tol)};

    GeodesicCertificate cert;
    const double h = r / steps_per_side;
    std::vector<CotangentState> fwd{center}, bwd{center};
    CotangentState st = center;
    for (int k = 0; k < steps_per_side; ++k) {
        st = rk4_hamiltonian_step(A, st, h);
        fwd.push_back(st);
    }
    st = center;
    for (int k = 0; k < steps_per_side; ++k) {
        st = rk4_hamiltonian_step(A, st, -h);
        bwd.push_back(st);
    }
    double length = 0.0;
    for (int k = -steps_per_side; k <= steps_per_side; ++k) {
        const CotangentState& s = k < 0 ? bwd[-k] : fwd[k];
        cert.times.push_back(k * h);
        cert.points.push_back(CF.chart.to_original(s.q));
        cert.covectors.push_back(CF.chart.covector_to_original(s.lam));
        if (k > -steps_per_side) {
            // |h(t)| = sqrt(2H) is the integrand of the length.
            Mat F = A.frame_matrix_unchecked(s.q);
            double s2 = 0.0;
            for (int i = 0; i < A.m; ++i) {
                const double hi = s.lam.dot(F.col(i));
                s2 += hi * hi;
            }
            length += std::sqrt(s2) * h;
        }
    }
    cert.length = length;
    cert.q1 = cert.points.front();
    cert.q2 = cert.points.back();
    return cert;
}

void save_calibration_json(const CalibrationField& CF, std::ostream& out) {
    nlohmann::json j;
    j["type"] = "calibration_field";
    j["structure"] = CF.chart.original.name;
    j["base"] = std::vector<double>(CF.chart.base.data(), CF.chart.base.data() + CF.chart.base.size());
    auto mat_to_json = [](const Mat& M) {
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < M.rows(); ++i)
            rows.emplace_back(M.row(i).begin(), M.row(i).end());
        return rows;
    };
    j["M"] = mat_to_json(CF.chart.M);
    j["eps"] = CF.eps;
    j["uprime_half"] =
        std::vector<double>(CF.uprime_half.data(), CF.uprime_half.data() + CF.uprime_half.size());
    j["grid_res"] = CF.grid_res;
    j["time_samples"] = CF.time_samples;
    j["settings"] = {{"newton_tol", CF.settings.newton_tol},
                     {"newton_max_iter", CF.settings.newton_max_iter},
                     {"jac_lower_bound", CF.settings.jac_lower_bound},
                     {"substeps", CF.settings.substeps},
                     {"seed_tol", CF.settings.seed_tol},
                     {"ham_tol", CF.settings.ham_tol}};
    j["ham_invariant_err"] = CF.ham_invariant_err;
    j["min_abs_detDQ"] = CF.min_abs_detDQ;
    std::vector<std::vector<double>> Q, L;
    for (const Vec& v : CF.Q_table) Q.emplace_back(v.data(), v.data() + v.size());
    for (const Vec& v : CF.Lam_table) L.emplace_back(v.data(), v.data() + v.size());
    j["Q"] = std::move(Q);
    j["Lam"] = std::move(L);
    out << j.dump(1) << "\n";
}

CalibrationField load_calibration_json(const SRStructure& S, std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("calibration file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("type").get<std::string>() != "calibration_field")
            throw ConfigError("not a calibration_field document");
        if (j.at("structure").get<std::string>() != S.name)
            throw ConfigError("calibration was built for structure '" +
                              j.at("structure").get<std::string>() + "', got '" + S.name + "'");
        auto base_v = j.at("base").get<std::vector<double>>();
        Vec base = Eigen::Map<const Vec>(base_v.data(), base_v.size());

        CalibrationField CF;
        CF.chart = adapt_chart(S, base);
        auto rows = j.at("M").get<std::vector<std::vector<double>>>();
        Mat M(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t c = 0; c < rows[i].size(); ++c) M(i, c) = rows[i][c];
        if ((M - CF.chart.M).lpNorm<Eigen::Infinity>() > 1e-9)
            throw ConfigError("stored chart matrix does not match the structure");
        CF.eps = j.at("eps").get<double>();
        auto uh = j.at("uprime_half").get<std::vector<double>>();
        CF.uprime_half = Eigen::Map<const Vec>(uh.data(), uh.size());
        CF.grid_res = j.at("grid_res").get<int>();
        CF.time_samples = j.at("time_samples").get<int>();
        const auto& s = j.at("settings");
        CF.settings.newton_tol = s.at("newton_tol").get<double>();
        CF.settings.newton_max_iter = s.at("newton_max_iter").get<int>();
        CF.settings.jac_lower_bound = s.at("jac_lower_bound").get<double>();
        CF.settings.substeps = s.at("substeps").get<int>();
        CF.settings.seed_tol = s.at("seed_tol").get<double>();
        CF.settings.ham_tol = s.at("ham_tol").get<double>();
        CF.ham_invariant_err = j.at("ham_invariant_err").get<double>();
        CF.min_abs_detDQ = j.at("min_abs_detDQ").get<double>();
        for (const auto& row : j.at("Q")) {
            auto v = row.get<std::vector<double>>();
            CF.Q_table.push_back(Eigen::Map<const Vec>(v.data(), v.size()));
        }
        for (const auto& row : j.at("Lam")) {
            auto v = row.get<std::vector<double>>();
            CF.Lam_table.push_back(Eigen::Map<const Vec>(v.data(), v.size()));
        }
        const size_t expected =
            static_cast<size_t>(CF.xprime_count()) * static_cast<size_t>(CF.time_samples);
        if (CF.Q_table.size() != expected || CF.Lam_table.size() != expected)
            throw ConfigError("flow table size does not match the stored grid");
        return CF;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("calibration file schema error: ") + e.what());
    }
}

}  // namespace ccgeo
