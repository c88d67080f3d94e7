#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gridbound/errors.hpp"
#include "gridbound/grid_model.hpp"
#include "gridbound/interval.hpp"

namespace gridbound {

struct ReluTerm {
    double slope = 0.0;  // a_i
    double shift = 0.0;  // b_i
};

// Piecewise-linear curve compiled to a ReLU cascade.
//
// Convex cost:      F(x)   = sum_i a'_i * relu(x - b_i), with slope increments
//                   a'_1 = s_1 and a'_i = s_i - s_{i-1} >= 0. Exact on the
//                   whole real line above the anchor, no caps.
// Concave benefit:  F*_0 = 0, F*_i = min(F*_{i-1} + a_i * relu(x - b_i), U_i)
//                   with the raw slopes a_i and cumulative caps
//                   U_i = sum_{k<=i} s_k * w_k.
//
// Shifts are strictly increasing, b_1 equals the device p_min, and both kinds
// evaluate to 0 at the anchor.
struct CompiledCurve {
    std::vector<ReluTerm> relu_terms;
    std::vector<double> caps;  // empty for convex-cost
    CurveKind kind = CurveKind::ConvexCost;
    double domain_lo = 0.0;  // device p_min
    double domain_hi = 0.0;  // p_min + total segment width
};

inline CompiledCurve compile(const PwlCurve& curve, double p_min) {
    if (curve.segments.empty()) throw CurveShapeError("curve has no segments");
    CompiledCurve cc;
    cc.kind = curve.kind;
    cc.domain_lo = p_min;

    double shift = p_min;
    double prev_slope = curve.segments.front().slope;
    double cap = 0.0;
    for (std::size_t i = 0; i < curve.segments.size(); ++i) {
        const auto& seg = curve.segments[i];
        if (!(seg.width > 0.0)) throw CurveShapeError("segment width must be > 0");
        if (!(seg.slope >= 0.0)) throw CurveShapeError("segment slope must be >= 0");
        if (curve.kind == CurveKind::ConvexCost) {
            if (seg.slope < prev_slope)
                throw CurveShapeError("convex-cost slopes must be nondecreasing");
            cc.relu_terms.push_back({i == 0 ? seg.slope : seg.slope - prev_slope, shift});
        } else {
            if (seg.slope > prev_slope)
                throw CurveShapeError("concave-benefit slopes must be nonincreasing");
            cap += seg.slope * seg.width;
            cc.relu_terms.push_back({seg.slope, shift});
            cc.caps.push_back(cap);
        }
        prev_slope = seg.slope;
        shift += seg.width;
    }
    cc.domain_hi = shift;
    return cc;
}

// Cascade evaluation without the domain guard; defined on the whole real line.
inline double eval_unchecked(const CompiledCurve& cc, double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < cc.relu_terms.size(); ++i) {
        const auto& t = cc.relu_terms[i];
        acc += t.slope * std::max(x - t.shift, 0.0);
        if (cc.kind == CurveKind::ConcaveBenefit) acc = std::min(acc, cc.caps[i]);
    }
    return acc;
}

inline double eval_concrete(const CompiledCurve& cc, double x) {
    const double tol = 1e-9 * std::max(1.0, std::max(std::abs(cc.domain_lo), std::abs(cc.domain_hi)));
    if (x < cc.domain_lo - tol || x > cc.domain_hi + tol)
        throw DomainError("curve evaluated outside [" + std::to_string(cc.domain_lo) + ", " +
                          std::to_string(cc.domain_hi) + "]");
    return eval_unchecked(cc, x);
}

// Both curve kinds are nondecreasing, so the exact interval image is the
// endpoint pair. The cascade route instead pushes the interval through every
// relu/add/clip node; for a scalar input the two coincide.
inline Interval eval_interval(const CompiledCurve& cc, const Interval& x,
                              bool strict_cascade = false) {
    const double tol =
        1e-9 * std::max(1.0, std::max(std::abs(cc.domain_lo), std::abs(cc.domain_hi)));
    if (x.lower < cc.domain_lo - tol || x.upper > cc.domain_hi + tol)
        throw DomainError("curve interval outside its domain");
    if (!strict_cascade) return Interval{eval_unchecked(cc, x.lower), eval_unchecked(cc, x.upper)};

    Interval acc{0.0, 0.0};
    for (std::size_t i = 0; i < cc.relu_terms.size(); ++i) {
        const auto& t = cc.relu_terms[i];
        Interval shifted{x.lower - t.shift, x.upper - t.shift};
        Interval rect{std::max(shifted.lower, 0.0), std::max(shifted.upper, 0.0)};
        acc = add(acc, scale(t.slope, rect));
        if (cc.kind == CurveKind::ConcaveBenefit)
            acc = Interval{std::min(acc.lower, cc.caps[i]), std::min(acc.upper, cc.caps[i])};
    }
    return acc;
}

struct CompiledCurves {
    std::vector<CompiledCurve> generator_cost;
    std::vector<CompiledCurve> demand_benefit;
};

inline CompiledCurves compile_all(const GridCase& c) {
    CompiledCurves out;
    out.generator_cost.reserve(c.generators.size());
    out.demand_benefit.reserve(c.demands.size());
    for (const auto& g : c.generators) out.generator_cost.push_back(compile(g.cost_curve, g.p_min));
    for (const auto& d : c.demands) out.demand_benefit.push_back(compile(d.benefit_curve, d.p_min));
    return out;
}

}  // namespace gridbound
