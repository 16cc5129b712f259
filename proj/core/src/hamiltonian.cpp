#include "ccgeo/hamiltonian.hpp"

#include <cmath>
#include <ostream>

#include "ccgeo/io.hpp"

namespace ccgeo {

double hamiltonian(const SRStructure& S, const CotangentState& st) {
    S.require_inside(st.q);
    Mat A = S.frame_matrix_unchecked(st.q);
    double H = 0.0;
    for (int i = 0; i < S.m; ++i) {
        double hi = st.lam.dot(A.col(i));
        H += hi * hi;
    }
    return 0.5 * H;
}

std::pair<Vec, Vec> hamiltonian_vector_field(const SRStructure& S, const CotangentState& st) {
    S.require_inside(st.q);
    Mat A = S.frame_matrix_unchecked(st.q);
    Vec qdot = Vec::Zero(S.n);
    Vec lamdot = Vec::Zero(S.n);
    for (int i = 0; i < S.m; ++i) {
        const double hi = st.lam.dot(A.col(i));
        qdot += hi * A.col(i);
        lamdot -= hi * (S.field_jacobian(i, st.q).transpose() * st.lam);
    }
    return {qdot, lamdot};
}

CotangentState rk4_hamiltonian_step(const SRStructure& S, const CotangentState& st, double h) {
    auto field = [&S](const CotangentState& s) {
        Mat A = S.frame_matrix_unchecked(s.q);
        Vec qdot = Vec::Zero(S.n), lamdot = Vec::Zero(S.n);
        for (int i = 0; i < S.m; ++i) {
            const double hi = s.lam.dot(A.col(i));
            qdot += hi * A.col(i);
            lamdot -= hi * (S.field_jacobian(i, s.q).transpose() * s.lam);
        }
        return std::make_pair(qdot, lamdot);
    };
    auto [k1q, k1l] = field(st);
    auto [k2q, k2l] = field({st.q + 0.5 * h * k1q, st.lam + 0.5 * h * k1l});
    auto [k3q, k3l] = field({st.q + 0.5 * h * k2q, st.lam + 0.5 * h * k2l});
    auto [k4q, k4l] = field({st.q + h * k3q, st.lam + h * k3l});
    return {st.q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
            st.lam + (h / 6.0) * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)};
}

ExtremalTrajectory integrate_extremal(const SRStructure& S, const CotangentState& st0, double T,
                                      int steps) {
    if (S.regularity == Regularity::C0)
        throw ConstructionFailed(S.name +
                                 ": Hamiltonian flow is not integrated on C0 structures "
                                 "(existence/uniqueness may fail)");
    if (steps < 1) throw ConfigError("integrate_extremal: steps must be >= 1");
    S.require_inside(st0.q);

    const double h = T / steps;
    ExtremalTrajectory traj;
    traj.step = h;
    traj.times.push_back(0.0);
    traj.states.push_back(st0);
    traj.H_values.push_back(hamiltonian(S, st0));

    CotangentState st = st0;
    for (int k = 0; k < steps; ++k) {
        CotangentState next = rk4_hamiltonian_step(S, st, h);
        if (!next.q.allFinite() || !next.lam.allFinite())
            throw NonFiniteState(S.name + ": non-finite state during integration");
        if (!S.domain.contains(next.q)) {
            traj.status = TrajectoryStatus::BoundaryHit;
            return traj;
        }
        st = next;
        traj.times.push_back((k + 1) * h);
        traj.states.push_back(st);
        traj.H_values.push_back(hamiltonian(S, st));
    }
    return traj;
}

Mat extremal_controls(const SRStructure& S, const ExtremalTrajectory& traj) {
    const int N = static_cast<int>(traj.states.size());
    Mat H(N, S.m);
    for (int k = 0; k < N; ++k) {
        Mat A = S.frame_matrix_unchecked(traj.states[k].q);
        for (int i = 0; i < S.m; ++i) H(k, i) = traj.states[k].lam.dot(A.col(i));
    }
    return H;
}

void write_trajectory_csv(std::ostream& out, const ExtremalTrajectory& traj) {
    const int n = static_cast<int>(traj.states.front().q.size());
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",q" << i;
    for (int i = 1; i <= n; ++i) out << ",lam" << i;
    out << ",H\n";
    for (size_t k = 0; k < traj.states.size(); ++k) {
        out << fmt17(traj.times[k]);
        for (int i = 0; i < n; ++i) out << "," << fmt17(traj.states[k].q[i]);
        for (int i = 0; i < n; ++i) out << "," << fmt17(traj.states[k].lam[i]);
        out << "," << fmt17(traj.H_values[k]) << "\n";
    }
}

}  // namespace ccgeo
