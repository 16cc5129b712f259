#ifndef CCGEO_QUASICALIB_HPP
#define CCGEO_QUASICALIB_HPP

#include <cstdint>
#include <iosfwd>

#include "ccgeo/structures.hpp"

namespace ccgeo {

/// Least-norm solution h of sum_j h_j X_j(p) = v, via SVD with relative
/// threshold 1e-10. Throws NotHorizontal when v is not in the column space.
Vec minimal_norm_preimage(const SRStructure& S, const Vec& p, const Vec& v);

/// Constant exact 1-form omega with omega_p = lambda_p and the measured
/// slack constants on the constructed neighborhood U.
struct QuasiCalibration {
    Vec p;
    int pivot = 0;      // 1-based index of the pivot field
    Vec hbar;           // minimal-norm preimage of X_pivot(p)
    Vec omega;          // constant covector, chart coordinates
    Box U;
    double eps1 = 0.0;  // slack of |<omega, sum h_j X_j>| <= (1+eps1)|h|
    double eps2 = 0.0;  // slack of <omega, sum (hbar_j/|hbar|) X_j> >= 1-eps2
    int sample_count = 0;
    std::uint64_t seed = 0;
};

/// eps1: max over sampled q of the operator norm of omega composed with the
/// frame matrix, minus 1 (the h-maximization is exact per q). eps2: worst
/// shortfall of the calibrated direction below 1. Deterministic given seed.
std::pair<double, double> measure_quasicalibration_bounds(const QuasiCalibration& QC,
                                                          const SRStructure& S,
                                                          const Box& U_test, int sample_count,
                                                          std::uint64_t seed);

/// Builds the quasi-calibration at p and bisects the neighborhood half-width
/// until eps1 <= target_eps and eps2 <= target_eps^2 (at most 40 rounds).
QuasiCalibration build_quasicalibration(const SRStructure& S, const Vec& p, double target_eps,
                                        int sample_count = 4000, std::uint64_t seed = 1);

struct C0Curve {
    std::vector<double> times;
    std::vector<Vec> points;
    bool boundary_hit = false;
};

/// RK4 integration of the constant-control field sum_j (hbar_j/|hbar|) X_j
/// through q over (-r, r). The realized control has unit Euclidean norm, so
/// the curve length equals the elapsed parameter length.
C0Curve quasicalibrated_flow(const QuasiCalibration& QC, const SRStructure& S, const Vec& q,
                             double r, int steps_per_side = 512);

void save_quasicalibration_json(const QuasiCalibration& QC, const SRStructure& S,
                                std::ostream& out);
QuasiCalibration load_quasicalibration_json(const SRStructure& S, std::istream& in);

}  // namespace ccgeo

#endif
