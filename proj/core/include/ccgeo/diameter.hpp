#ifndef CCGEO_DIAMETER_HPP
#define CCGEO_DIAMETER_HPP

#include <iosfwd>

#include "ccgeo/distance.hpp"
#include "ccgeo/quasicalib.hpp"

namespace ccgeo {

/// rbar such that every admissible curve from q of CC-length <= 2 rbar stays
/// inside W_box: chart speed is bounded by the sampled frame operator norm
/// (times a 1.05 safety factor).
double safe_radius(const SRStructure& S, const Vec& q, const Box& W_box);

struct BallDiameterReport {
    std::string structure;
    Vec q;
    double r = 0.0;
    double delta = 0.0;
    Vec q1, q2;
    double lower_bound = 0.0;
    double upper_bound = 0.0;  // = 2r, triangle inequality
    double margin_s = 1.0;     // C11 regime
    double eps1 = 0.0, eps2 = 0.0;  // C0 regime
    double rbar = 0.0;
    Regularity regime = Regularity::C11;
    double budget = 0.0;  // summed numerical tolerance; certified = lower - budget
};

/// Largest adapted-coordinates box verified (by inversion at its corners)
/// to lie inside the calibrated image W.
Box calibrated_safe_box(const CalibrationField& CF);

BallDiameterReport ball_diameter_certificate_C11(const SRStructure& S,
                                                 const CalibrationField& CF, double margin_s,
                                                 const Vec& q, double r, double delta);

BallDiameterReport ball_diameter_certificate_C0(const SRStructure& S,
                                                const QuasiCalibration& QC, const Vec& q,
                                                double r, double delta);

struct SweepOptions {
    double delta_fraction = 1e-3;  // delta = r * delta_fraction
    int cloud_points = 5;
    double target_eps = 0.05;      // C0 regime slack target
    bool crosscheck = false;       // optimizer distance between q1 and q2
    std::uint64_t seed = 1;
    int verify_samples = 10000;
};

struct SweepRow {
    int base_index = 0;  // 0 = the requested base point
    Vec base;
    double r = 0.0, delta = 0.0, lower = 0.0, upper = 0.0, ratio = 0.0, budget = 0.0;
    double check_upper = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<BallDiameterReport> reports;
    double margin_s = 1.0;
    double eps1 = 0.0, eps2 = 0.0;
};

/// Builds one calibration (or quasi-calibration) at q and reuses it at a
/// cloud of nearby base points, exercising uniformity in the base point.
SweepResult diameter_sweep(const SRStructure& S, const Vec& q, const std::vector<double>& radii,
                           Regularity regime, const SweepOptions& opts = {});

void write_sweep_csv(std::ostream& out, const std::string& structure, Regularity regime,
                     const SweepResult& sweep);
void write_sweep_reports_json(std::ostream& out, const SweepResult& sweep);

}  // namespace ccgeo

#endif
