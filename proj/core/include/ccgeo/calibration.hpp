#ifndef CCGEO_CALIBRATION_HPP
#define CCGEO_CALIBRATION_HPP

#include <iosfwd>
#include <optional>

#include "ccgeo/hamiltonian.hpp"

namespace ccgeo {

/// Affine chart y = M (x - base) normalizing the frame at the base point:
/// the adapted frame satisfies X_i(0) = e_i for i = 1..m.
struct AdaptedChart {
    Vec base;
    Mat M;
    Mat Minv;
    SRStructure original;
    SRStructure adapted;  // frame and domain expressed in adapted coordinates

    Vec to_adapted(const Vec& x) const { return M * (x - base); }
    Vec to_original(const Vec& y) const { return base + Minv * y; }
    /// Pullback of an adapted-coordinates covector to the original chart.
    Vec covector_to_original(const Vec& lam) const { return M.transpose() * lam; }
};

AdaptedChart adapt_chart(const SRStructure& S, const Vec& p);

/// Seed covector xi(x') = c(x') e_1^* on the hyperplane {y_1 = 0}, with c
/// chosen so that H((0,x'), xi(x')) = 1/2. Throws SeedDegenerate when the
/// first frame components all vanish at (0,x').
Vec seed_covector(const SRStructure& adapted, const Vec& xprime, double tol_seed = 1e-6);

struct CalibrationSettings {
    double newton_tol = 1e-10;
    int newton_max_iter = 60;
    double jac_lower_bound = 0.05;
    int substeps = 8;        // RK4 substeps per flow-table interval
    double seed_tol = 1e-6;
    double ham_tol = 1e-8;   // |sum_i <Lam, X_i>^2 - 1| bound at table nodes
    int max_shrink_rounds = 8;
};

/// Flow-table representation of the calibration (Q, Lambda) built by
/// integrating the Hamiltonian flow from seeded covectors on {y_1 = 0}.
/// All tables live in adapted coordinates.
class CalibrationField {
  public:
    AdaptedChart chart;
    double eps = 0.0;        // time half-width of (-eps, eps)
    Vec uprime_half;         // half-widths of the U' box (dimension n-1)
    int grid_res = 0;        // nodes per U' axis
    int time_samples = 0;    // odd; index (time_samples-1)/2 is t = 0
    CalibrationSettings settings;

    std::vector<Vec> Q_table;    // [node(xp, ti)], adapted coordinates
    std::vector<Vec> Lam_table;  // matching covectors

    double ham_invariant_err = 0.0;  // worst |2H - 1| over the table
    double min_abs_detDQ = 0.0;      // worst |det DQ| over the table

    int dim() const { return chart.adapted.n; }
    int xprime_dims() const { return dim() - 1; }
    int xprime_count() const;
    int node(int xp, int ti) const { return xp * time_samples + ti; }
    Vec xprime_at(int xp) const;           // (n-1)-vector in the U' box
    double time_at(int ti) const;
    double table_dt() const { return eps / ((time_samples - 1) / 2); }

    /// Solution of the Hamiltonian system at time t from seed ((0,x'), xi(x')).
    CotangentState flow(double t, const Vec& xprime) const;
};

/// Builds the calibration at p, shrinking eps / U' on invariant violations
/// (at most settings.max_shrink_rounds rounds). eps <= 0 or grid_res <= 0
/// select defaults from the domain size.
CalibrationField build_calibration(const SRStructure& S, const Vec& p, double eps = 0.0,
                                   int grid_res = 0, CalibrationSettings settings = {});

struct CalibrationEval {
    double t = 0.0;      // flow parameter of the preimage
    Vec xprime;          // seed coordinates of the preimage
    Vec x_adapted;
    Vec lambda_adapted;
    Vec lambda_original;
    int newton_iters = 0;
    double residual = 0.0;
};

/// Inverts Q at x (original coordinates) by Newton iteration seeded from the
/// flow table, then refines Lambda by one exact flow integration.
/// Throws OutsideCalibratedSet when no seed converges inside the grid hull.
CalibrationEval evaluate_calibration(const CalibrationField& CF, const Vec& x);

struct DirectionEval {
    Vec Y;         // unit horizontal field at x, original coordinates
    Vec controls;  // h_i = <Lambda(x), X_i(x)>
    Vec lambda;    // original-coordinates covector
};

DirectionEval calibrated_direction(const CalibrationField& CF, const Vec& x);

struct CalibrationReport {
    double margin_s = 0.0;      // max over samples of sup_{|h|=1} <Lam, sum h_i X_i>
    double unit_error = 0.0;    // max |<Lam, Y> - 1|
    std::vector<double> loop_residuals;  // |loop integral of Lambda| per refinement
    std::vector<double> loop_steps;      // matching quadrature step sizes
    int sample_count = 0;
    std::uint64_t seed = 0;
};

CalibrationReport verify_calibration(const CalibrationField& CF, int sample_count,
                                     std::uint64_t seed);

struct GeodesicCertificate {
    std::vector<double> times;     // in [-r, r]
    std::vector<Vec> points;       // original coordinates
    std::vector<Vec> covectors;    // original coordinates
    double length = 0.0;
    Vec q1, q2;                    // endpoints
};

/// Integral curve of the calibrated field Y through the base point of CF,
/// i.e. the normal extremal from (0, xi(0)) in the adapted chart.
GeodesicCertificate minimizing_geodesic_through(const CalibrationField& CF, double r,
                                               int steps_per_side = 512);

void save_calibration_json(const CalibrationField& CF, std::ostream& out);
/// Rebinds the stored tables to `S` (which must match the stored name/shape).
CalibrationField load_calibration_json(const SRStructure& S, std::istream& in);

}  // namespace ccgeo

#endif
