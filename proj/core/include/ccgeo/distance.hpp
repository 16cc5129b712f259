#ifndef CCGEO_DISTANCE_HPP
#define CCGEO_DISTANCE_HPP

#include <optional>

#include "ccgeo/calibration.hpp"

namespace ccgeo {

/// Piecewise-constant-control discrete admissible curve.
struct AdmissibleCurvePath {
    std::vector<double> times;   // N+1 grid nodes
    std::vector<Vec> points;     // N+1 chart points
    std::vector<Vec> controls;   // N per-interval m-vectors
};

/// One RK4 step of the frozen-control field sum_j h_j X_j.
Vec control_rk4_step(const SRStructure& S, const Vec& q, const Vec& h, double dt);

/// Length with minimal-norm controls recomputed at each node.
/// Throws NotAdmissible when the step-consistency invariant fails.
double curve_length(const SRStructure& S, const AdmissibleCurvePath& path,
                    double consistency_tol = 1e-6);

struct DistanceOptions {
    int segments = 24;
    int restarts = 6;
    std::uint64_t seed = 1;
    double endpoint_tol = 1e-6;
    double grad_tol = 1e-8;
    int max_iter = 400;
    double mu0 = 10.0;
    int max_escalations = 8;
    int shooting_samples = 32;
};

enum class DistanceStatus { Finite, InftySuspect, InftyCertified };

struct DistanceEstimate {
    double upper = std::numeric_limits<double>::infinity();
    double lower = 0.0;
    std::optional<AdmissibleCurvePath> witness;
    DistanceStatus status = DistanceStatus::Finite;
    std::string method;
    struct Diagnostics {
        int feasible_restarts = 0;
        double best_endpoint_residual = std::numeric_limits<double>::infinity();
        int total_iterations = 0;
        double final_grad_norm = 0.0;
    } diag;
};

/// Upper bound by minimizing the discrete control energy with an escalating
/// endpoint penalty; multi-start plus one normal-extremal shooting seed.
/// length = sqrt(2 * energy) of the best feasible curve. When no restart is
/// feasible the estimate is flagged InftySuspect, upgraded to InftyCertified
/// when a conserved linear functional separates p from q.
DistanceEstimate distance_upper(const SRStructure& S, const Vec& p, const Vec& q,
                                const DistanceOptions& opts = {});

struct OracleResult {
    bool reachable = false;
    bool cap_hit = false;   // frontier touched the radius cap
    double dist = std::numeric_limits<double>::infinity();
};

/// Brute-force Dijkstra over a lattice (spacing step/2) with one-RK4-step
/// frame moves of parameter length `step`. Upper-bound family for small
/// instances. Throws CapExceeded when the frontier exhausts radius_cap
/// without reaching q.
OracleResult distance_oracle_graph(const SRStructure& S, const Vec& p, const Vec& q, double step,
                                   double radius_cap);

struct PotentialResult {
    double value = 0.0;
    double path_error = 0.0;  // |difference| against a second path
};

/// Potential of the exact form Lambda: adaptive line integral from the
/// calibration base to x along the straight segment, with a bent second
/// path for a path-independence error estimate.
PotentialResult calibration_potential(const CalibrationField& CF, const Vec& x,
                                      double quad_tol = 1e-8);

/// Certified lower bound max(0, |phi(q) - phi(p)|) / margin_s on the
/// W-constrained distance.
double distance_lower(const CalibrationField& CF, const Vec& p, const Vec& q, double margin_s);

/// Orthonormal basis (columns) of the covectors annihilating every frame
/// field at every sampled point; such functionals are constant along all
/// admissible curves.
Mat horizontal_annihilator(const SRStructure& S, int samples = 200, std::uint64_t seed = 3,
                           double tol = 1e-10);

/// First annihilator basis vector, if any.
std::optional<Vec> conserved_linear_functional(const SRStructure& S, int samples = 200,
                                               std::uint64_t seed = 3, double tol = 1e-10);

}  // namespace ccgeo

#endif
