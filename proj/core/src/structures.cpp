#include "ccgeo/structures.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ccgeo/expression.hpp"
#include "ccgeo/rng.hpp"

namespace ccgeo {

Mat SRStructure::field_jacobian(int i, const Vec& p) const {
    if (frame[i].jacobian) return frame[i].jacobian(p);
    const double h = fd_step(p);
    Mat J(n, n);
    Vec pp = p, pm = p;
    for (int j = 0; j < n; ++j) {
        pp[j] = p[j] + h;
        pm[j] = p[j] - h;
        J.col(j) = (frame[i].evaluate(pp) - frame[i].evaluate(pm)) / (2.0 * h);
        pp[j] = p[j];
        pm[j] = p[j];
    }
    return J;
}

Mat evaluate_frame(const SRStructure& S, const Vec& p) {
    S.require_inside(p);
    return S.frame_matrix_unchecked(p);
}

int frame_rank(const SRStructure& S, const Vec& p, double tol) {
    Mat A = evaluate_frame(S, p);
    if (A.lpNorm<Eigen::Infinity>() == 0.0) return 0;
    Eigen::JacobiSVD<Mat> svd(A);
    const Vec& sv = svd.singularValues();
    const double cut = tol * sv[0];
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cut) ++r;
    return r;
}

namespace {

FrameField constant_field(int index, const Vec& v) {
    const int n = static_cast<int>(v.size());
    return FrameField{index, [v](const Vec&) { return v; },
                      [n](const Vec&) { return Mat::Zero(n, n); }};
}

SRStructure make_euclidean(int n) {
    SRStructure S;
    S.name = "euclidean" + std::to_string(n);
    S.n = n;
    S.m = n;
    S.domain = Box::cube(n, 5.0);
    S.regularity = Regularity::C11;
    for (int i = 0; i < n; ++i) S.frame.push_back(constant_field(i + 1, Vec::Unit(n, i)));
    return S;
}

SRStructure make_heisenberg() {
    SRStructure S;
    S.name = "heisenberg";
    S.n = 3;
    S.m = 2;
    S.domain = Box::cube(3, 2.0);
    S.regularity = Regularity::C11;
    S.frame.push_back(FrameField{
        1,
        [](const Vec& p) {
            Vec v(3);
            v << 1.0, 0.0, -0.5 * p[1];
            return v;
        },
        [](const Vec&) {
            Mat J = Mat::Zero(3, 3);
            J(2, 1) = -0.5;
            return J;
        }});
    S.frame.push_back(FrameField{
        2,
        [](const Vec& p) {
            Vec v(3);
            v << 0.0, 1.0, 0.5 * p[0];
            return v;
        },
        [](const Vec&) {
            Mat J = Mat::Zero(3, 3);
            J(2, 0) = 0.5;
            return J;
        }});
    return S;
}

SRStructure make_martinet() {
    SRStructure S;
    S.name = "martinet";
    S.n = 3;
    S.m = 2;
    S.domain = Box::cube(3, 2.0);
    S.regularity = Regularity::C11;
    S.frame.push_back(constant_field(1, Vec::Unit(3, 0)));
    S.frame.push_back(FrameField{
        2,
        [](const Vec& p) {
            Vec v(3);
            v << 0.0, 1.0, p[0] * p[0];
            return v;
        },
        [](const Vec& p) {
            Mat J = Mat::Zero(3, 3);
            J(2, 0) = 2.0 * p[0];
            return J;
        }});
    return S;
}

SRStructure make_grushin() {
    SRStructure S;
    S.name = "grushin";
    S.n = 2;
    S.m = 2;
    S.domain = Box::cube(2, 1.5);
    S.regularity = Regularity::C0;
    S.frame.push_back(constant_field(1, Vec::Unit(2, 0)));
    S.frame.push_back(FrameField{
        2,
        [](const Vec& p) {
            Vec v(2);
            v << 0.0, p[0];
            return v;
        },
        [](const Vec&) {
            Mat J = Mat::Zero(2, 2);
            J(1, 0) = 1.0;
            return J;
        }});
    return S;
}

SRStructure make_flat_nonbracket() {
    SRStructure S;
    S.name = "flat_nonbracket";
    S.n = 3;
    S.m = 2;
    S.domain = Box::cube(3, 2.0);
    S.regularity = Regularity::C11;
    S.frame.push_back(constant_field(1, Vec::Unit(3, 0)));
    S.frame.push_back(constant_field(2, Vec::Unit(3, 1)));
    return S;
}

SRStructure make_duplicated_line() {
    SRStructure S;
    S.name = "duplicated_line";
    S.n = 1;
    S.m = 2;
    S.domain = Box::cube(1, 2.0);
    S.regularity = Regularity::C0;
    S.frame.push_back(constant_field(1, Vec::Ones(1)));
    S.frame.push_back(constant_field(2, Vec::Ones(1)));
    return S;
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"euclidean2",     "euclidean3", "heisenberg",      "martinet",
            "grushin",        "flat_nonbracket", "duplicated_line"};
}

SRStructure builtin(const std::string& name) {
    if (name == "euclidean2") return make_euclidean(2);
    if (name == "euclidean3") return make_euclidean(3);
    if (name == "heisenberg") return make_heisenberg();
    if (name == "martinet") return make_martinet();
    if (name == "grushin") return make_grushin();
    if (name == "flat_nonbracket") return make_flat_nonbracket();
    if (name == "duplicated_line") return make_duplicated_line();
    throw UnknownStructure("unknown structure '" + name + "'");
}

ValidationReport validate(const SRStructure& S, int sample_count, std::uint64_t seed) {
    ValidationReport rep;
    rep.worst_rank = S.m;
    rep.worst_min_field_norm = std::numeric_limits<double>::infinity();
    rep.pass = true;

    std::vector<Vec> points;
    points.push_back(S.domain.center());
    // Structured points: push samples onto the coordinate hyperplanes through
    // the box center so degeneracy loci such as x=0 are always probed.
    for (int a = 0; a < S.n; ++a) {
        for (int k = 0; k < 4; ++k) {
            Vec p = halton_in_box(static_cast<std::uint64_t>(17 * a + k + 1), S.domain);
            p[a] = S.domain.center()[a];
            points.push_back(p);
        }
    }
    Rng rng(seed);
    while (static_cast<int>(points.size()) < sample_count)
        points.push_back(rng.uniform_in_box(S.domain));

    for (const Vec& p : points) {
        Mat A = S.frame_matrix_unchecked(p);
        int r;
        if (A.lpNorm<Eigen::Infinity>() == 0.0) {
            r = 0;
        } else {
            Eigen::JacobiSVD<Mat> svd(A);
            const Vec& sv = svd.singularValues();
            r = 0;
            for (int i = 0; i < sv.size(); ++i)
                if (sv[i] > 1e-9 * sv[0]) ++r;
        }
        double max_field = 0.0;
        for (int i = 0; i < S.m; ++i) max_field = std::max(max_field, A.col(i).norm());

        bool ok;
        if (S.regularity == Regularity::C11) {
            ok = (S.m <= S.n) && (r == S.m);
        } else {
            ok = max_field > 1e-12;
        }
        if (r < rep.worst_rank || (!ok && rep.pass)) {
            rep.worst_rank = std::min(rep.worst_rank, r);
            if (!ok) rep.worst_point = p;
        }
        rep.worst_min_field_norm = std::min(rep.worst_min_field_norm, max_field);
        if (!ok && rep.pass) {
            rep.pass = false;
            std::ostringstream os;
            os << "invariant violated at [" << p.transpose() << "]: rank " << r
               << ", largest field norm " << max_field;
            rep.detail = os.str();
        }
    }
    if (rep.pass) rep.detail = "ok";
    return rep;
}

SRStructure load_structure_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("structure file is not valid JSON: ") + e.what());
    }
    SRStructure S;
    try {
        S.name = j.at("name").get<std::string>();
        S.n = j.at("n").get<int>();
        S.m = j.at("m").get<int>();
        std::string reg = j.at("regularity").get<std::string>();
        if (reg == "C11")
            S.regularity = Regularity::C11;
        else if (reg == "C0")
            S.regularity = Regularity::C0;
        else
            throw ConfigError("regularity must be \"C11\" or \"C0\"");
        auto mins = j.at("domain").at("min").get<std::vector<double>>();
        auto maxs = j.at("domain").at("max").get<std::vector<double>>();
        if (static_cast<int>(mins.size()) != S.n || static_cast<int>(maxs.size()) != S.n)
            throw ConfigError("domain min/max must have length n");
        S.domain.min = Eigen::Map<const Vec>(mins.data(), S.n);
        S.domain.max = Eigen::Map<const Vec>(maxs.data(), S.n);

        const auto& fields = j.at("fields");
        if (static_cast<int>(fields.size()) != S.m)
            throw ConfigError("expected m = " + std::to_string(S.m) + " field entries");
        for (int i = 0; i < S.m; ++i) {
            const auto& comps = fields.at(i);
            if (static_cast<int>(comps.size()) != S.n)
                throw ConfigError("field " + std::to_string(i + 1) + " must have n components");
            std::vector<Expression> exprs;
            for (int c = 0; c < S.n; ++c)
                exprs.push_back(Expression::parse(comps.at(c).get<std::string>(), S.n));
            const int n = S.n;
            S.frame.push_back(FrameField{
                i + 1,
                [exprs, n](const Vec& p) {
                    Vec v(n);
                    for (int c = 0; c < n; ++c) v[c] = exprs[c].eval(p);
                    return v;
                },
                nullptr});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("structure file schema error: ") + e.what());
    }
    return S;
}

SRStructure load_structure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open structure file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_structure_json(ss.str());
}

}  // namespace ccgeo
