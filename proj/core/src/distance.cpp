#include "ccgeo/distance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <unordered_map>

#include "ccgeo/quasicalib.hpp"
#include "ccgeo/rng.hpp"

namespace ccgeo {

Vec control_rk4_step(const SRStructure& S, const Vec& q, const Vec& h, double dt) {
    auto f = [&](const Vec& x) -> Vec { return S.frame_matrix_unchecked(x) * h; };
    Vec k1 = f(q);
    Vec k2 = f(q + 0.5 * dt * k1);
    Vec k3 = f(q + 0.5 * dt * k2);
    Vec k4 = f(q + dt * k3);
    return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double curve_length(const SRStructure& S, const AdmissibleCurvePath& path,
                    double consistency_tol) {
    const int N = static_cast<int>(path.controls.size());
    double length = 0.0;
    for (int k = 0; k < N; ++k) {
        const double dt = path.times[k + 1] - path.times[k];
        Vec predicted = control_rk4_step(S, path.points[k], path.controls[k], dt);
        if ((predicted - path.points[k + 1]).norm() >
            consistency_tol * (1.0 + path.points[k].norm()))
            throw NotAdmissible(S.name + ": path fails the step-consistency invariant");
        Vec v = S.frame_matrix_unchecked(path.points[k]) * path.controls[k];
        Vec hmin = minimal_norm_preimage(S, path.points[k], v);
        length += hmin.norm() * dt;
    }
    return length;
}

namespace {

// Stage cache of one RK4 rollout segment, for the adjoint sweep.
struct SegmentTape {
    Vec x1, x2, x3, x4;
};

Vec rollout(const SRStructure& S, const Vec& p, const std::vector<Vec>& controls, double dt,
            std::vector<SegmentTape>* tape) {
    Vec q = p;
    for (const Vec& h : controls) {
        auto f = [&](const Vec& x) -> Vec { return S.frame_matrix_unchecked(x) * h; };
        SegmentTape t;
        t.x1 = q;
        Vec k1 = f(t.x1);
        t.x2 = q + 0.5 * dt * k1;
        Vec k2 = f(t.x2);
        t.x3 = q + 0.5 * dt * k2;
        Vec k3 = f(t.x3);
        t.x4 = q + dt * k3;
        Vec k4 = f(t.x4);
        q = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (tape) tape->push_back(std::move(t));
    }
    return q;
}

Mat control_jacobian(const SRStructure& S, const Vec& x, const Vec& h) {
    Mat A = Mat::Zero(S.n, S.n);
    for (int j = 0; j < S.m; ++j)
        if (h[j] != 0.0) A += h[j] * S.field_jacobian(j, x);
    return A;
}

// Objective: 0.5 sum |h_k|^2 dt + mu |q_N - target|^2. Gradient by a
// discrete adjoint sweep through the RK4 stages.
double penalized_objective(const SRStructure& S, const Vec& p, const Vec& target,
                           const std::vector<Vec>& controls, double dt, double mu, Vec* grad,
                           double* endpoint_residual) {
    const int N = static_cast<int>(controls.size());
    const int m = S.m;
    std::vector<SegmentTape> tape;
    tape.reserve(N);
    Vec qN = rollout(S, p, controls, dt, &tape);

    double energy = 0.0;
    for (const Vec& h : controls) energy += 0.5 * h.squaredNorm() * dt;
    Vec r = qN - target;
    if (endpoint_residual) *endpoint_residual = r.norm();
    double obj = energy + mu * r.squaredNorm();
    if (!grad) return obj;

    grad->setZero();
    Vec lam = 2.0 * mu * r;
    for (int k = N - 1; k >= 0; --k) {
        const Vec& h = controls[k];
        const SegmentTape& t = tape[k];
        Mat A1 = control_jacobian(S, t.x1, h);
        Mat A2 = control_jacobian(S, t.x2, h);
        Mat A3 = control_jacobian(S, t.x3, h);
        Mat A4 = control_jacobian(S, t.x4, h);
        Vec s4 = (dt / 6.0) * lam;
        Vec s3 = (dt / 3.0) * lam + dt * (A4.transpose() * s4);
        Vec s2 = (dt / 3.0) * lam + 0.5 * dt * (A3.transpose() * s3);
        Vec s1 = (dt / 6.0) * lam + 0.5 * dt * (A2.transpose() * s2);
        Vec gh = S.frame_matrix_unchecked(t.x1).transpose() * s1 +
                 S.frame_matrix_unchecked(t.x2).transpose() * s2 +
                 S.frame_matrix_unchecked(t.x3).transpose() * s3 +
                 S.frame_matrix_unchecked(t.x4).transpose() * s4;
        gh += dt * h;
        grad->segment(static_cast<Eigen::Index>(k) * m, m) = gh;
        lam = lam + A1.transpose() * s1 + A2.transpose() * s2 + A3.transpose() * s3 +
              A4.transpose() * s4;
    }
    return obj;
}

std::vector<Vec> unflatten(const Vec& u, int N, int m) {
    std::vector<Vec> controls(N);
    for (int k = 0; k < N; ++k) controls[k] = u.segment(static_cast<Eigen::Index>(k) * m, m);
    return controls;
}

struct LbfgsResult {
    Vec u;
    double obj = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

LbfgsResult lbfgs_minimize(const std::function<double(const Vec&, Vec*)>& fg, Vec u0,
                           double grad_tol, int max_iter) {
    const int memory = 8;
    std::deque<Vec> s_hist, y_hist;
    Vec u = std::move(u0);
    Vec g(u.size());
    double f = fg(u, &g);
    LbfgsResult res;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        if (g.norm() <= grad_tol) break;
        // Two-loop recursion.
        Vec d = -g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
            alpha[i] = rho * s_hist[i].dot(d);
            d -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            d *= gamma;
        }
        for (size_t i = 0; i < s_hist.size(); ++i) {
            const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
            const double beta = rho * y_hist[i].dot(d);
            d += (alpha[i] - beta) * s_hist[i];
        }
        if (d.dot(g) >= 0.0) {
            d = -g;
            s_hist.clear();
            y_hist.clear();
        }
        // Armijo backtracking.
        double step = 1.0;
        const double slope = g.dot(d);
        double f_new = f;
        Vec g_new(g.size()), u_new;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            u_new = u + step * d;
            f_new = fg(u_new, &g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        Vec s_vec = u_new - u;
        Vec y_vec = g_new - g;
        if (s_vec.dot(y_vec) > 1e-14 * s_vec.norm() * y_vec.norm()) {
            s_hist.push_back(s_vec);
            y_hist.push_back(y_vec);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        u = std::move(u_new);
        g = g_new;
        f = f_new;
    }
    res.u = u;
    res.obj = f;
    res.grad_norm = g.norm();
    return res;
}

// Shooting seed: best normal extremal over a covector sample, resampled to
// the optimizer's control grid.
std::optional<Vec> shooting_seed(const SRStructure& S, const Vec& p, const Vec& q, int N,
                                 int samples, Rng rng) {
    if (S.regularity == Regularity::C0 || !S.domain.contains(p)) return std::nullopt;
    const double guess = std::max((q - p).norm(), 1e-3);
    const double T = 2.0 * guess;
    const int steps = 200;
    double best_score = std::numeric_limits<double>::infinity();
    Vec best_seed;
    for (int s = 0; s < samples; ++s) {
        Vec lam0 = rng.on_sphere(S.n);
        const double H0 = hamiltonian(S, {p, lam0});
        if (H0 < 1e-10) continue;
        lam0 /= std::sqrt(2.0 * H0);  // unit-speed extremal
        ExtremalTrajectory traj;
        try {
            traj = integrate_extremal(S, {p, lam0}, T, steps);
        } catch (const std::exception&) {
            continue;
        }
        Mat controls = extremal_controls(S, traj);
        int kbest = 0;
        double dbest = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < traj.states.size(); ++k) {
            const double d = (traj.states[k].q - q).norm();
            if (d < dbest) {
                dbest = d;
                kbest = static_cast<int>(k);
            }
        }
        if (kbest == 0 || dbest >= best_score) continue;
        const double tstar = std::abs(traj.times[kbest]);
        // Reparametrize [0, t*] -> [0, 1]: controls scale by t*.
        Vec u(static_cast<Eigen::Index>(N) * S.m);
        for (int seg = 0; seg < N; ++seg) {
            const double frac = (seg + 0.5) / N;
            const int src = std::min<int>(kbest, static_cast<int>(std::floor(frac * kbest)));
            u.segment(static_cast<Eigen::Index>(seg) * S.m, S.m) =
                tstar * controls.row(src).transpose();
        }
        best_score = dbest;
        best_seed = u;
    }
    if (best_seed.size() == 0) return std::nullopt;
    return best_seed;
}

}  // namespace

Mat horizontal_annihilator(const SRStructure& S, int samples, std::uint64_t seed, double tol) {
    std::vector<Vec> rows;
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        Vec x = s % 2 == 0 ? halton_in_box(static_cast<std::uint64_t>(s / 2 + 1), S.domain)
                           : rng.uniform_in_box(S.domain);
        Mat A = S.frame_matrix_unchecked(x);
        for (int i = 0; i < S.m; ++i) rows.push_back(A.col(i));
    }
    Mat G(static_cast<Eigen::Index>(rows.size()), S.n);
    for (size_t r = 0; r < rows.size(); ++r) G.row(static_cast<Eigen::Index>(r)) = rows[r];
    Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double cut = sv.size() > 0 ? tol * std::max(sv[0], 1.0) : tol;
    int null_dim = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] <= cut) ++null_dim;
    null_dim += S.n - static_cast<int>(sv.size());
    if (null_dim == 0) return Mat(S.n, 0);
    return svd.matrixV().rightCols(null_dim);
}

std::optional<Vec> conserved_linear_functional(const SRStructure& S, int samples,
                                               std::uint64_t seed, double tol) {
    Mat B = horizontal_annihilator(S, samples, seed, tol);
    if (B.cols() == 0) return std::nullopt;
    return Vec(B.col(0));
}

DistanceEstimate distance_upper(const SRStructure& S, const Vec& p, const Vec& q,
                                const DistanceOptions& opts) {
    S.require_inside(p);
    S.require_inside(q);
    DistanceEstimate est;
    est.method = "penalized-energy-lbfgs";

    // A conserved linear functional separating p and q certifies d = +inf.
    Mat annihilator = horizontal_annihilator(S, 200, opts.seed ^ 0x5eedULL);
    for (int c = 0; c < annihilator.cols(); ++c) {
        if (std::abs(annihilator.col(c).dot(q - p)) > 1e-8 * (1.0 + (q - p).norm())) {
            est.status = DistanceStatus::InftyCertified;
            return est;
        }
    }

    const int N = opts.segments;
    const int m = S.m;
    const double dt = 1.0 / N;
    Rng rng(opts.seed);

    std::vector<Vec> seeds;
    if (auto shot = shooting_seed(S, p, q, N, opts.shooting_samples, rng.fork(7)))
        seeds.push_back(*shot);
    for (int r = 0; r < opts.restarts; ++r) {
        Rng rr = rng.fork(100 + r);
        Vec u(static_cast<Eigen::Index>(N) * m);
        const double scale = std::max((q - p).norm(), 0.1);
        for (int i = 0; i < u.size(); ++i) u[i] = scale * rr.normal();
        seeds.push_back(u);
    }

    double best_energy = std::numeric_limits<double>::infinity();
    Vec best_u;
    for (const Vec& seed_u : seeds) {
        Vec u = seed_u;
        double mu = opts.mu0;
        double residual = std::numeric_limits<double>::infinity();
        for (int esc = 0; esc <= opts.max_escalations; ++esc) {
            auto fg = [&](const Vec& uu, Vec* g) -> double {
                return penalized_objective(S, p, q, unflatten(uu, N, m), dt, mu, g, nullptr);
            };
            LbfgsResult res = lbfgs_minimize(fg, u, opts.grad_tol, opts.max_iter);
            u = res.u;
            est.diag.total_iterations += res.iterations;
            est.diag.final_grad_norm = res.grad_norm;
            penalized_objective(S, p, q, unflatten(u, N, m), dt, mu, nullptr, &residual);
            if (residual <= opts.endpoint_tol) break;
            mu *= 10.0;
        }
        est.diag.best_endpoint_residual = std::min(est.diag.best_endpoint_residual, residual);
        if (residual <= opts.endpoint_tol) {
            ++est.diag.feasible_restarts;
            double energy = 0.0;
            for (const Vec& h : unflatten(u, N, m)) energy += 0.5 * h.squaredNorm() * dt;
            if (energy < best_energy) {
                best_energy = energy;
                best_u = u;
            }
        }
    }

    if (est.diag.feasible_restarts == 0) {
        est.status = DistanceStatus::InftySuspect;
        return est;
    }
    est.status = DistanceStatus::Finite;
    est.upper = std::sqrt(2.0 * best_energy);

    AdmissibleCurvePath path;
    path.controls = unflatten(best_u, N, m);
    path.times.resize(N + 1);
    for (int k = 0; k <= N; ++k) path.times[k] = static_cast<double>(k) / N;
    path.points.push_back(p);
    Vec x = p;
    for (int k = 0; k < N; ++k) {
        x = control_rk4_step(S, x, path.controls[k], dt);
        path.points.push_back(x);
    }
    est.witness = std::move(path);
    return est;
}

OracleResult distance_oracle_graph(const SRStructure& S, const Vec& p, const Vec& q, double step,
                                   double radius_cap) {
    if (!(step > 0.0)) throw ConfigError("oracle step must be positive");
    S.require_inside(p);
    S.require_inside(q);
    if ((q - p).norm() > radius_cap)
        throw CapExceeded(S.name + ": target lies beyond the oracle radius cap");

    const double a = 0.5 * step;  // lattice spacing
    const int n = S.n;
    auto key_of = [&](const Vec& x) {
        std::string key;
        for (int i = 0; i < n; ++i)
            key += std::to_string(static_cast<long long>(std::llround(x[i] / a))) + ",";
        return key;
    };
    auto snap = [&](const Vec& x) {
        Vec y(n);
        for (int i = 0; i < n; ++i) y[i] = a * std::llround(x[i] / a);
        return y;
    };

    const Vec start = snap(p);
    const std::string target = key_of(snap(q));
    using Item = std::pair<double, std::string>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    std::unordered_map<std::string, double> dist;
    std::unordered_map<std::string, Vec> coords;
    OracleResult out;

    const std::string skey = key_of(start);
    dist[skey] = 0.0;
    coords[skey] = start;
    pq.emplace(0.0, skey);

    while (!pq.empty()) {
        auto [d, key] = pq.top();
        pq.pop();
        if (d > dist[key] + 1e-15) continue;
        if (key == target) {
            out.reachable = true;
            out.dist = d;
            return out;
        }
        const Vec x = coords[key];
        Mat A = S.frame_matrix_unchecked(x);
        for (int i = 0; i < S.m; ++i) {
            if (A.col(i).norm() < 1e-14) continue;
            const double w = step * minimal_norm_preimage(S, x, A.col(i)).norm();
            for (int sign = -1; sign <= 1; sign += 2) {
                Vec h = Vec::Zero(S.m);
                h[i] = sign;
                Vec moved = snap(control_rk4_step(S, x, h, step));
                const std::string mkey = key_of(moved);
                if (mkey == key) continue;
                if (!S.domain.contains(moved)) continue;
                if ((moved - p).norm() > radius_cap) {
                    out.cap_hit = true;
                    continue;
                }
                auto it = dist.find(mkey);
                if (it == dist.end() || d + w < it->second - 1e-15) {
                    dist[mkey] = d + w;
                    coords[mkey] = moved;
                    pq.emplace(d + w, mkey);
                }
            }
        }
    }
    out.reachable = false;
    return out;
}

namespace {

double lambda_along(const CalibrationField& CF, const Vec& x0, const Vec& d, double s) {
    Vec lam = evaluate_calibration(CF, x0 + s * d).lambda_original;
    return lam.dot(d);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double line_integral(const CalibrationField& CF, const Vec& from, const Vec& to, double tol) {
    const Vec d = to - from;
    if (d.norm() < 1e-15) return 0.0;
    auto f = [&](double s) { return lambda_along(CF, from, d, s); };
    const double fa = f(0.0), fm = f(0.5), fb = f(1.0);
    const double whole = (fa + 4.0 * fm + fb) / 6.0;
    return adaptive_simpson(f, 0.0, 1.0, fa, fm, fb, whole, tol, 12);
}

}  // namespace

PotentialResult calibration_potential(const CalibrationField& CF, const Vec& x,
                                      double quad_tol) {
    const Vec base = CF.chart.base;
    PotentialResult res;
    if ((x - base).norm() < 1e-15) return res;
    res.value = line_integral(CF, base, x, quad_tol);

    // Second, bent path for a path-independence estimate.
    const Vec d = x - base;
    Vec w = Vec::Unit(d.size(), 0);
    if (std::abs(w.dot(d)) > 0.9 * d.norm()) w = Vec::Unit(d.size(), 1 % d.size());
    w -= (w.dot(d) / d.squaredNorm()) * d;
    if (w.norm() > 1e-12) {
        w.normalize();
        double delta = 0.05 * d.norm();
        for (int attempt = 0; attempt < 5; ++attempt) {
            const Vec mid = base + 0.5 * d + delta * w;
            try {
                const double alt = line_integral(CF, base, mid, quad_tol) +
                                   line_integral(CF, mid, x, quad_tol);
                res.path_error = std::abs(alt - res.value);
                return res;
            } catch (const OutsideCalibratedSet&) {
                delta *= 0.5;
            }
        }
    }
    res.path_error = 0.0;  // no transverse room: report only quadrature
    return res;
}

double distance_lower(const CalibrationField& CF, const Vec& p, const Vec& q, double margin_s) {
    if (!(margin_s > 0.0)) throw ConfigError("calibration margin must be positive");
    const double phip = calibration_potential(CF, p).value;
    const double phiq = calibration_potential(CF, q).value;
    return std::max(0.0, std::abs(phiq - phip)) / margin_s;
}

}  // namespace ccgeo
