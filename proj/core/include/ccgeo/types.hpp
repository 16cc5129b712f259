#ifndef CCGEO_TYPES_HPP
#define CCGEO_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ccgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned closed box in R^n.
struct Box {
    Vec min;
    Vec max;

    int dim() const { return static_cast<int>(min.size()); }

    bool contains(const Vec& p, double tol = 0.0) const {
        if (p.size() != min.size()) return false;
        for (int i = 0; i < p.size(); ++i) {
            if (p[i] < min[i] - tol || p[i] > max[i] + tol) return false;
        }
        return true;
    }

    Vec center() const { return 0.5 * (min + max); }

    Vec half_width() const { return 0.5 * (max - min); }

    double min_half_width() const { return half_width().minCoeff(); }

    /// Euclidean distance from an interior point to the boundary.
    double boundary_distance(const Vec& q) const {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < min.size(); ++i) {
            d = std::min(d, std::min(q[i] - min[i], max[i] - q[i]));
        }
        return d;
    }

    /// Box with the same center and half-widths scaled by `factor`.
    Box shrunk(double factor) const {
        Vec c = center(), h = factor * half_width();
        return Box{c - h, c + h};
    }

    static Box centered(const Vec& c, const Vec& half) { return Box{c - half, c + half}; }
    static Box cube(int n, double half) {
        return Box{Vec::Constant(n, -half), Vec::Constant(n, half)};
    }
};

struct PointOutsideDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownStructure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct JacobianUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteState : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SeedDegenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstructionFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutsideCalibratedSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotHorizontal : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShrinkExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroFrame : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotAdmissible : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateBox : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ccgeo

#endif
