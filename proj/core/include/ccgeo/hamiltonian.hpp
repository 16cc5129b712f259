#ifndef CCGEO_HAMILTONIAN_HPP
#define CCGEO_HAMILTONIAN_HPP

#include <iosfwd>
#include <vector>

#include "ccgeo/structures.hpp"

namespace ccgeo {

struct CotangentState {
    Vec q;
    Vec lam;
};

enum class TrajectoryStatus { Complete, BoundaryHit };

/// Sampled solution of the Hamiltonian system, with conserved-H diagnostics.
struct ExtremalTrajectory {
    std::vector<double> times;
    std::vector<CotangentState> states;
    std::vector<double> H_values;
    double step = 0.0;
    TrajectoryStatus status = TrajectoryStatus::Complete;

    double h_drift() const {
        double d = 0.0;
        for (double h : H_values) d = std::max(d, std::abs(h - H_values.front()));
        return d;
    }
    const CotangentState& back() const { return states.back(); }
};

/// H(q, lam) = 1/2 sum_i <lam, X_i(q)>^2.
double hamiltonian(const SRStructure& S, const CotangentState& st);

/// Right-hand side of the Hamiltonian system:
///   qdot = sum_i h_i X_i(q),  lamdot = -sum_i h_i (DX_i)^T lam,
/// with h_i = <lam, X_i(q)>.
std::pair<Vec, Vec> hamiltonian_vector_field(const SRStructure& S, const CotangentState& st);

/// One classical RK4 step of the Hamiltonian system (no domain checks).
CotangentState rk4_hamiltonian_step(const SRStructure& S, const CotangentState& st, double h);

/// Fixed-step classical RK4. T may be negative; the trajectory is truncated
/// with BoundaryHit status if q leaves the domain. Refuses C0 structures
/// (the flow may be ill-posed there).
ExtremalTrajectory integrate_extremal(const SRStructure& S, const CotangentState& st0, double T,
                                      int steps);

/// h_i(t_k) = <lam(t_k), X_i(q(t_k))>, one row per sample.
Mat extremal_controls(const SRStructure& S, const ExtremalTrajectory& traj);

/// CSV columns: t, q1..qn, lam1..lamn, H; 17 significant digits.
void write_trajectory_csv(std::ostream& out, const ExtremalTrajectory& traj);

}  // namespace ccgeo

#endif
