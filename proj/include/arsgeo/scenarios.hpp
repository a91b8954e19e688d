#pragma once

// Ready-made structures: classical frames, torus counterexamples, the
// quantum-oscillator sphere, and two orientability fixtures. Every entry
// carries its expected topology and curvature-integral outcome so tests and
// the CLI can compare computed results against stored values.

#include <optional>
#include <string>
#include <vector>

#include "atlas.hpp"
#include "frame.hpp"

namespace arsgeo {

struct Scenario {
    std::string name;
    ARS2 structure;
    double cap_delta = 0; // half-width of excised bands at non-periodic chart edges
    std::optional<double> divergence_exponent; // expected log-log slope of I(eps)

    // Primary chart for single-frame operations.
    const Frame2& frame() const { return structure.frames().front(); }
};

namespace scenario_detail {

inline Chart rect(std::string name, double x0, double x1, double y0, double y1) {
    Chart ch;
    ch.name = std::move(name);
    ch.x0 = x0;
    ch.x1 = x1;
    ch.y0 = y0;
    ch.y1 = y1;
    return ch;
}

inline Chart square_torus(std::string name) {
    Chart ch = rect(std::move(name), -M_PI, M_PI, -M_PI, M_PI);
    ch.ident_x = AxisIdent::Periodic;
    ch.ident_y = AxisIdent::Periodic;
    return ch;
}

inline Scenario grushin_like(std::string name, std::string notes) {
    AtlasMetadata meta;
    meta.orientable = true;
    meta.trivializable = true;
    meta.notes = std::move(notes);
    Frame2 f(rect("plane", -3, 3, -3, 3), VectorField2::parse("1", "0"),
             VectorField2::parse("0", "x"));
    return {std::move(name), ARS2({std::move(f)}, {}, std::move(meta)), 0.0, std::nullopt};
}

inline Scenario one_torus(std::string name, const char* fy, AtlasMetadata meta) {
    Frame2 f(square_torus("torus"), VectorField2::parse("1", "0"),
             VectorField2::parse("0", fy));
    return {std::move(name), ARS2({std::move(f)}, {}, std::move(meta)), 0.0, std::nullopt};
}

} // namespace scenario_detail

inline std::vector<std::string> scenario_names() {
    return {"grushin",      "grushin_m10",      "davydov",
            "torus_cos",    "torus_sin",        "torus_sin_warped",
            "sphere_quantum", "torus_distribution_atlas", "klein_frame",
            "flat_torus"};
}

inline Scenario get_scenario(const std::string& name) {
    using namespace scenario_detail;

    if (name == "grushin")
        return grushin_like("grushin", "canonical rank-varying plane structure");
    if (name == "grushin_m10")
        return grushin_like("grushin_m10",
                            "loci computed from the base point (-1, 0), which lies "
                            "off the singular line");

    if (name == "davydov") {
        AtlasMetadata meta;
        meta.orientable = true;
        meta.trivializable = true;
        meta.has_tangency = true;
        meta.notes = "parabolic singular locus tangent to the distribution at the origin";
        Frame2 f(rect("plane", -2, 2, -2, 2), VectorField2::parse("1", "0"),
                 VectorField2::parse("0", "y-x^2"));
        return {"davydov", ARS2({std::move(f)}, {}, std::move(meta)), 0.0, std::nullopt};
    }

    if (name == "torus_cos") {
        AtlasMetadata meta;
        meta.chi_plus = 0;
        meta.chi_minus = 0; // M- is empty
        meta.orientable = true;
        meta.trivializable = true;
        meta.has_tangency = true;
        meta.notes = "det touches zero without changing sign: every locus point is a "
                     "tangency point and the curvature integral diverges";
        Scenario s = one_torus("torus_cos", "1-cos(x)", std::move(meta));
        s.divergence_exponent = -3.0;
        return s;
    }

    if (name == "torus_sin" || name == "torus_sin_warped") {
        AtlasMetadata meta;
        meta.chi_plus = 0;
        meta.chi_minus = 0;
        meta.expected_gauss_bonnet = 0;
        meta.orientable = true;
        meta.trivializable = true;
        meta.notes = "both regions are cylinders split by two singular circles";
        const char* fy = name == "torus_sin" ? "sin(x)" : "sin(x)*exp(0.3*cos(y))";
        return one_torus(name, fy, std::move(meta));
    }

    if (name == "sphere_quantum") {
        // Chart around the second coordinate axis: q(u,v) =
        // (sin u cos v, cos u, sin u sin v) with u = x, v = y. The ambient
        // rotation fields (y,-x,0) and (0,z,-y) pull back to the frame below;
        // det = -cot u, so Z is the equator u = pi/2. Bands of half-width
        // cap_delta around the poles are outside the chart.
        const double delta = 1e-3;
        Chart ch = rect("polar", delta, M_PI - delta, -M_PI, M_PI);
        ch.ident_y = AxisIdent::Periodic;
        ch.embedding = std::array<ScalarExpr, 3>{ExprParser::parse("sin(x)*cos(y)"),
                                                 ExprParser::parse("cos(x)"),
                                                 ExprParser::parse("sin(x)*sin(y)")};
        AtlasMetadata meta;
        meta.chi_plus = 1;
        meta.chi_minus = 1;
        meta.expected_gauss_bonnet = 0;
        meta.orientable = true;
        meta.trivializable = true;
        meta.notes = "rotation generators restricted to the unit sphere";
        Frame2 f(std::move(ch),
                 VectorField2::parse("cos(y)", "-cos(x)*sin(y)/sin(x)"),
                 VectorField2::parse("-sin(y)", "-cos(x)*cos(y)/sin(x)"));
        Scenario s{"sphere_quantum", ARS2({std::move(f)}, {}, std::move(meta)), 0.0,
                   std::nullopt};
        s.cap_delta = delta;
        return s;
    }

    if (name == "torus_distribution_atlas") {
        // Non-orientable rank-varying distribution: a band chart where the
        // line field degenerates and a full-torus chart of rank 2. The two
        // overlap components see opposite determinant signs, so no global
        // sign choice exists.
        Chart band = rect("band", -M_PI / 2, M_PI / 2, -M_PI, M_PI);
        band.ident_y = AxisIdent::Periodic;
        Frame2 f0(std::move(band), VectorField2::parse("1", "0"),
                  VectorField2::parse("0", "sin(x)"));
        Frame2 f1(square_torus("bulk"), VectorField2::parse("1", "0"),
                  VectorField2::parse("0", "1"));
        Overlap ov;
        ov.chart_i = 0;
        ov.chart_j = 1;
        for (double x : {0.4 * M_PI, -0.4 * M_PI}) {
            OverlapComponent comp;
            for (int k = 0; k < 8; ++k)
                comp.samples.push_back({x, -M_PI + 2 * M_PI * (k + 0.5) / 8});
            ov.components.push_back(std::move(comp));
        }
        AtlasMetadata meta;
        meta.orientable = false;
        meta.trivializable = false;
        meta.distribution_only = true;
        meta.notes = "orientability fixture; the charts share the distribution, not a metric";
        return {"torus_distribution_atlas",
                ARS2({std::move(f0), std::move(f1)}, {std::move(ov)}, std::move(meta)), 0.0,
                std::nullopt};
    }

    if (name == "klein_frame") {
        // Klein bottle: (x, -pi) ~ (x, pi) and (-pi, y) ~ (pi, -y). The frame
        // descends because sin(2x) matches at the flipped edge.
        Chart ch = square_torus("klein");
        ch.ident_x = AxisIdent::Flip;
        AtlasMetadata meta;
        meta.orientable = true;
        meta.trivializable = true;
        meta.distribution_only = true;
        meta.notes = "orientable rank-varying distribution on a non-orientable surface";
        Frame2 f(std::move(ch), VectorField2::parse("1", "0"),
                 VectorField2::parse("0", "sin(2*x)"));
        return {"klein_frame", ARS2({std::move(f)}, {}, std::move(meta)), 0.0, std::nullopt};
    }

    if (name == "flat_torus") {
        AtlasMetadata meta;
        meta.chi_plus = 0;
        meta.chi_minus = 0; // M- is empty
        meta.expected_gauss_bonnet = 0;
        meta.orientable = true;
        meta.trivializable = true;
        meta.notes = "empty singular locus; Riemannian control case";
        return one_torus("flat_torus", "1", std::move(meta));
    }

    throw input_error("unknown scenario '" + name + "'");
}

} // namespace arsgeo
