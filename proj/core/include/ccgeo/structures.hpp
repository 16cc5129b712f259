#ifndef CCGEO_STRUCTURES_HPP
#define CCGEO_STRUCTURES_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ccgeo/types.hpp"

namespace ccgeo {

enum class Regularity { C11, C0 };

inline std::string to_string(Regularity r) { return r == Regularity::C11 ? "C11" : "C0"; }

/// One coordinate vector field of the frame. `jacobian` may be empty, in
/// which case callers fall back to central finite differences.
struct FrameField {
    int index = 0;  // 1-based position in the frame
    std::function<Vec(const Vec&)> evaluate;
    std::function<Mat(const Vec&)> jacobian;
};

/// Central finite-difference step at p.
inline double fd_step(const Vec& p) { return 1e-5 * (1.0 + p.norm()); }

/// A frame of m vector fields on a coordinate box; the metric is the one
/// declaring the frame orthonormal (where independent).
struct SRStructure {
    std::string name;
    int n = 0;
    int m = 0;
    std::vector<FrameField> frame;
    Box domain;
    Regularity regularity = Regularity::C11;

    void require_inside(const Vec& p, double tol = 0.0) const {
        if (!domain.contains(p, tol))
            throw PointOutsideDomain(name + ": point outside the domain box");
    }

    /// n x m matrix of frame columns at p (no domain check).
    Mat frame_matrix_unchecked(const Vec& p) const {
        Mat A(n, m);
        for (int i = 0; i < m; ++i) A.col(i) = frame[i].evaluate(p);
        return A;
    }

    /// Coordinate Jacobian of field i (0-based), analytic when available,
    /// otherwise central differences with step fd_step(p).
    Mat field_jacobian(int i, const Vec& p) const;

    bool has_analytic_jacobians() const {
        for (const auto& f : frame)
            if (!f.jacobian) return false;
        return true;
    }
};

/// Columns are X_i(p). Throws PointOutsideDomain.
Mat evaluate_frame(const SRStructure& S, const Vec& p);

/// Numerical rank of the frame matrix with a relative singular-value
/// threshold; rank 0 iff the matrix is identically zero.
int frame_rank(const SRStructure& S, const Vec& p, double tol = 1e-9);

/// Built-in registry. Throws UnknownStructure.
SRStructure builtin(const std::string& name);
std::vector<std::string> builtin_names();

struct ValidationReport {
    bool pass = false;
    int worst_rank = 0;
    double worst_min_field_norm = 0.0;
    Vec worst_point;
    std::string detail;
};

/// Checks the C11 constant-rank invariant or the C0 nonvanishing invariant
/// on a quasi-random sample (plus structured points on the coordinate
/// hyperplanes, so degeneracy loci like x=0 are hit by construction).
ValidationReport validate(const SRStructure& S, int sample_count, std::uint64_t seed);

/// Structure-definition document (JSON text): name, n, m, regularity,
/// domain {min, max}, fields as per-coordinate expressions in x1..xn.
SRStructure load_structure_json(const std::string& text);
SRStructure load_structure_file(const std::string& path);

}  // namespace ccgeo

#endif
