#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "gridbound/errors.hpp"
#include "gridbound/interval.hpp"
#include "json.hpp"

namespace gridbound {

enum class CurveKind { ConvexCost, ConcaveBenefit };

struct PwlSegment {
    double slope = 0.0;  // $/pu-h
    double width = 0.0;  // pu
    bool operator==(const PwlSegment&) const = default;
};

// Piecewise-linear curve stored as (slope, width) segments anchored at the
// owning device's p_min; absolute shifts are derived downstream, never stored.
struct PwlCurve {
    std::vector<PwlSegment> segments;
    CurveKind kind = CurveKind::ConvexCost;

    double total_width() const {
        double w = 0.0;
        for (const auto& s : segments) w += s.width;
        return w;
    }
    bool operator==(const PwlCurve&) const = default;
};

struct Bus {
    int id = 0;
    bool is_slack = false;
    bool operator==(const Bus&) const = default;
};

struct Line {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double susceptance = 0.0;       // per-unit admittance magnitude, > 0
    double flow_limit_base = 0.0;   // symmetric base-case MW limit (pu)
    double flow_limit_ctg = 0.0;    // symmetric post-contingency MW limit (pu)
    bool operator==(const Line&) const = default;
};

struct Generator {
    int id = 0;
    int bus = 0;
    double p_min = 0.0;
    double p_max = 0.0;
    PwlCurve cost_curve;  // convex, nondecreasing
    bool operator==(const Generator&) const = default;
};

struct Demand {
    int id = 0;
    int bus = 0;
    double p_min = 0.0;
    double p_max = 0.0;
    PwlCurve benefit_curve;  // concave, nondecreasing
    bool operator==(const Demand&) const = default;
};

// Full parsed instance. Immutable by convention after construction; safe to
// share read-only across threads.
struct GridCase {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<Demand> demands;
    std::vector<int> contingencies;  // line ids
    double tau = 1.0;                // dispatch interval duration (h)
    double penalty_inj = 1e6;        // $/pu-h
    double penalty_flow = 1e6;       // $/pu-h
    std::optional<double> base_mva;  // documentation only, never used for scaling

    int n_buses() const { return static_cast<int>(buses.size()); }
    int n_lines() const { return static_cast<int>(lines.size()); }
    int n_gens() const { return static_cast<int>(generators.size()); }
    int n_demands() const { return static_cast<int>(demands.size()); }

    int slack_bus() const {
        for (const auto& b : buses)
            if (b.is_slack) return b.id;
        throw ValidationError("no slack bus declared");
    }

    bool operator==(const GridCase&) const = default;
};

namespace detail {

inline void check_keys(const nlohmann::ordered_json& obj, const char* path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw SchemaError(std::string(path) + ": unknown key \"" + it.key() + "\"");
    }
}

inline const nlohmann::ordered_json& require_key(const nlohmann::ordered_json& obj,
                                                 const char* path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError(std::string(path) + ": missing key \"" + key + "\"");
    return *it;
}

inline double get_number(const nlohmann::ordered_json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path + ": expected a number");
    return v.get<double>();
}

inline int get_int(const nlohmann::ordered_json& v, const std::string& path) {
    if (!v.is_number_integer()) throw SchemaError(path + ": expected an integer");
    return v.get<int>();
}

inline bool get_bool(const nlohmann::ordered_json& v, const std::string& path) {
    if (!v.is_boolean()) throw SchemaError(path + ": expected a boolean");
    return v.get<bool>();
}

inline PwlCurve parse_curve(const nlohmann::ordered_json& v, CurveKind kind,
                            const std::string& path) {
    if (!v.is_array() || v.empty())
        throw SchemaError(path + ": expected a nonempty array of [slope, width] pairs");
    PwlCurve curve;
    curve.kind = kind;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& seg = v[i];
        const std::string segpath = path + "[" + std::to_string(i) + "]";
        if (!seg.is_array() || seg.size() != 2)
            throw SchemaError(segpath + ": expected [slope, width]");
        curve.segments.push_back(
            {get_number(seg[0], segpath + ".slope"), get_number(seg[1], segpath + ".width")});
    }
    return curve;
}

inline void validate_curve(const PwlCurve& curve, double span, const std::string& owner) {
    double prev = curve.segments.front().slope;
    for (std::size_t i = 0; i < curve.segments.size(); ++i) {
        const auto& s = curve.segments[i];
        if (!(s.width > 0.0))
            throw ValidationError(owner + ": segment " + std::to_string(i) +
                                  " width must be > 0");
        if (!(s.slope >= 0.0))
            throw ValidationError(owner + ": segment " + std::to_string(i) +
                                  " slope must be >= 0");
        if (curve.kind == CurveKind::ConvexCost && s.slope < prev)
            throw ValidationError(owner + ": cost slopes must be nondecreasing (segment " +
                                  std::to_string(i) + ")");
        if (curve.kind == CurveKind::ConcaveBenefit && s.slope > prev)
            throw ValidationError(owner + ": benefit slopes must be nonincreasing (segment " +
                                  std::to_string(i) + ")");
        prev = s.slope;
    }
    if (curve.total_width() < span - 1e-12)
        throw ValidationError(owner + ": curve total width " + std::to_string(curve.total_width()) +
                              " is smaller than the device range " + std::to_string(span));
}

}  // namespace detail

// Checks every model invariant; throws ValidationError naming the offending
// entity, or DisconnectedError when the base network is not connected.
inline void validate(const GridCase& c) {
    if (c.buses.empty()) throw ValidationError("case has no buses");

    std::vector<bool> seen(c.buses.size(), false);
    int slack_count = 0;
    for (const auto& b : c.buses) {
        if (b.id < 0 || b.id >= c.n_buses() || seen[b.id])
            throw ValidationError("bus " + std::to_string(b.id) +
                                  ": ids must be contiguous 0..n_b-1 and unique");
        seen[b.id] = true;
        if (b.is_slack) ++slack_count;
    }
    if (slack_count != 1)
        throw ValidationError("exactly one slack bus required, found " +
                              std::to_string(slack_count));

    std::vector<bool> seen_l(c.lines.size(), false);
    for (const auto& l : c.lines) {
        const std::string who = "line " + std::to_string(l.id);
        if (l.id < 0 || l.id >= c.n_lines() || seen_l[l.id])
            throw ValidationError(who + ": ids must be contiguous 0..n_l-1 and unique");
        seen_l[l.id] = true;
        if (l.from_bus < 0 || l.from_bus >= c.n_buses())
            throw ValidationError(who + ": from bus " + std::to_string(l.from_bus) +
                                  " does not exist");
        if (l.to_bus < 0 || l.to_bus >= c.n_buses())
            throw ValidationError(who + ": to bus " + std::to_string(l.to_bus) + " does not exist");
        if (l.from_bus == l.to_bus) throw ValidationError(who + ": from and to bus coincide");
        if (!(l.susceptance > 0.0)) throw ValidationError(who + ": susceptance must be > 0");
        if (!(l.flow_limit_base > 0.0)) throw ValidationError(who + ": limit_base must be > 0");
        if (!(l.flow_limit_ctg > 0.0)) throw ValidationError(who + ": limit_ctg must be > 0");
    }

    std::vector<bool> seen_g(c.generators.size(), false);
    for (const auto& g : c.generators) {
        const std::string who = "generator " + std::to_string(g.id);
        if (g.id < 0 || g.id >= c.n_gens() || seen_g[g.id])
            throw ValidationError(who + ": ids must be contiguous 0..n_g-1 and unique");
        seen_g[g.id] = true;
        if (g.bus < 0 || g.bus >= c.n_buses())
            throw ValidationError(who + ": bus " + std::to_string(g.bus) + " does not exist");
        if (!(g.p_min <= g.p_max)) throw ValidationError(who + ": p_min must be <= p_max");
        if (g.cost_curve.kind != CurveKind::ConvexCost)
            throw ValidationError(who + ": cost curve must be convex kind");
        if (g.cost_curve.segments.empty())
            throw ValidationError(who + ": cost curve needs at least one segment");
        detail::validate_curve(g.cost_curve, g.p_max - g.p_min, who);
    }

    std::vector<bool> seen_d(c.demands.size(), false);
    for (const auto& d : c.demands) {
        const std::string who = "demand " + std::to_string(d.id);
        if (d.id < 0 || d.id >= c.n_demands() || seen_d[d.id])
            throw ValidationError(who + ": ids must be contiguous 0..n_d-1 and unique");
        seen_d[d.id] = true;
        if (d.bus < 0 || d.bus >= c.n_buses())
            throw ValidationError(who + ": bus " + std::to_string(d.bus) + " does not exist");
        if (!(d.p_min <= d.p_max)) throw ValidationError(who + ": p_min must be <= p_max");
        if (d.benefit_curve.kind != CurveKind::ConcaveBenefit)
            throw ValidationError(who + ": benefit curve must be concave kind");
        if (d.benefit_curve.segments.empty())
            throw ValidationError(who + ": benefit curve needs at least one segment");
        detail::validate_curve(d.benefit_curve, d.p_max - d.p_min, who);
    }

    std::vector<bool> in_ctg(c.lines.size(), false);
    for (int id : c.contingencies) {
        if (id < 0 || id >= c.n_lines())
            throw ValidationError("contingency line " + std::to_string(id) + " does not exist");
        if (in_ctg[id])
            throw ValidationError("contingency line " + std::to_string(id) + " listed twice");
        in_ctg[id] = true;
    }

    if (!(c.tau > 0.0)) throw ValidationError("tau must be > 0");
    if (!(c.penalty_inj > 0.0)) throw ValidationError("penalty_inj must be > 0");
    if (!(c.penalty_flow > 0.0)) throw ValidationError("penalty_flow must be > 0");

    // base network connectivity (BFS over all lines)
    std::vector<std::vector<int>> adj(c.buses.size());
    for (const auto& l : c.lines) {
        adj[l.from_bus].push_back(l.to_bus);
        adj[l.to_bus].push_back(l.from_bus);
    }
    std::vector<bool> reached(c.buses.size(), false);
    std::queue<int> frontier;
    frontier.push(0);
    reached[0] = true;
    while (!frontier.empty()) {
        int b = frontier.front();
        frontier.pop();
        for (int nb : adj[b])
            if (!reached[nb]) {
                reached[nb] = true;
                frontier.push(nb);
            }
    }
    for (int b = 0; b < c.n_buses(); ++b)
        if (!reached[b])
            throw DisconnectedError("base network is not connected: bus " + std::to_string(b) +
                                    " is unreachable from bus 0");
}

// Parses and validates a UTF-8 JSON case file. Unknown keys are rejected at
// every level. limit_ctg falls back to limit_base when omitted; penalty
// coefficients default to 1e6 when omitted. Fallbacks are reported through
// `warnings` when provided.
inline GridCase parse_case(const std::string& text,
                           std::vector<std::string>* warnings = nullptr) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("top level must be a JSON object");
    detail::check_keys(j, "case",
                       {"buses", "lines", "generators", "demands", "contingencies", "tau",
                        "penalty_inj", "penalty_flow", "base_mva"});

    GridCase c;
    const auto& jb = detail::require_key(j, "case", "buses");
    if (!jb.is_array()) throw SchemaError("buses: expected an array");
    for (std::size_t i = 0; i < jb.size(); ++i) {
        const std::string path = "buses[" + std::to_string(i) + "]";
        const auto& v = jb[i];
        if (!v.is_object()) throw SchemaError(path + ": expected an object");
        detail::check_keys(v, path.c_str(), {"id", "slack"});
        Bus b;
        b.id = detail::get_int(detail::require_key(v, path.c_str(), "id"), path + ".id");
        if (v.contains("slack")) b.is_slack = detail::get_bool(v["slack"], path + ".slack");
        c.buses.push_back(b);
    }

    const auto& jl = detail::require_key(j, "case", "lines");
    if (!jl.is_array()) throw SchemaError("lines: expected an array");
    for (std::size_t i = 0; i < jl.size(); ++i) {
        const std::string path = "lines[" + std::to_string(i) + "]";
        const auto& v = jl[i];
        if (!v.is_object()) throw SchemaError(path + ": expected an object");
        detail::check_keys(v, path.c_str(),
                           {"id", "from", "to", "susceptance", "limit_base", "limit_ctg"});
        Line l;
        l.id = detail::get_int(detail::require_key(v, path.c_str(), "id"), path + ".id");
        l.from_bus = detail::get_int(detail::require_key(v, path.c_str(), "from"), path + ".from");
        l.to_bus = detail::get_int(detail::require_key(v, path.c_str(), "to"), path + ".to");
        l.susceptance = detail::get_number(detail::require_key(v, path.c_str(), "susceptance"),
                                           path + ".susceptance");
        l.flow_limit_base = detail::get_number(detail::require_key(v, path.c_str(), "limit_base"),
                                               path + ".limit_base");
        if (v.contains("limit_ctg")) {
            l.flow_limit_ctg = detail::get_number(v["limit_ctg"], path + ".limit_ctg");
        } else {
            l.flow_limit_ctg = l.flow_limit_base;
            if (warnings)
                warnings->push_back("line " + std::to_string(l.id) +
                                    ": limit_ctg omitted, falling back to limit_base");
        }
        c.lines.push_back(l);
    }

    const auto& jg = detail::require_key(j, "case", "generators");
    if (!jg.is_array()) throw SchemaError("generators: expected an array");
    for (std::size_t i = 0; i < jg.size(); ++i) {
        const std::string path = "generators[" + std::to_string(i) + "]";
        const auto& v = jg[i];
        if (!v.is_object()) throw SchemaError(path + ": expected an object");
        detail::check_keys(v, path.c_str(), {"id", "bus", "p_min", "p_max", "cost"});
        Generator g;
        g.id = detail::get_int(detail::require_key(v, path.c_str(), "id"), path + ".id");
        g.bus = detail::get_int(detail::require_key(v, path.c_str(), "bus"), path + ".bus");
        g.p_min =
            detail::get_number(detail::require_key(v, path.c_str(), "p_min"), path + ".p_min");
        g.p_max =
            detail::get_number(detail::require_key(v, path.c_str(), "p_max"), path + ".p_max");
        g.cost_curve = detail::parse_curve(detail::require_key(v, path.c_str(), "cost"),
                                           CurveKind::ConvexCost, path + ".cost");
        c.generators.push_back(g);
    }

    const auto& jd = detail::require_key(j, "case", "demands");
    if (!jd.is_array()) throw SchemaError("demands: expected an array");
    for (std::size_t i = 0; i < jd.size(); ++i) {
        const std::string path = "demands[" + std::to_string(i) + "]";
        const auto& v = jd[i];
        if (!v.is_object()) throw SchemaError(path + ": expected an object");
        detail::check_keys(v, path.c_str(), {"id", "bus", "p_min", "p_max", "benefit"});
        Demand d;
        d.id = detail::get_int(detail::require_key(v, path.c_str(), "id"), path + ".id");
        d.bus = detail::get_int(detail::require_key(v, path.c_str(), "bus"), path + ".bus");
        d.p_min =
            detail::get_number(detail::require_key(v, path.c_str(), "p_min"), path + ".p_min");
        d.p_max =
            detail::get_number(detail::require_key(v, path.c_str(), "p_max"), path + ".p_max");
        d.benefit_curve = detail::parse_curve(detail::require_key(v, path.c_str(), "benefit"),
                                              CurveKind::ConcaveBenefit, path + ".benefit");
        c.demands.push_back(d);
    }

    const auto& jc = detail::require_key(j, "case", "contingencies");
    if (!jc.is_array()) throw SchemaError("contingencies: expected an array of line ids");
    for (std::size_t i = 0; i < jc.size(); ++i)
        c.contingencies.push_back(
            detail::get_int(jc[i], "contingencies[" + std::to_string(i) + "]"));

    c.tau = detail::get_number(detail::require_key(j, "case", "tau"), "tau");
    if (j.contains("penalty_inj"))
        c.penalty_inj = detail::get_number(j["penalty_inj"], "penalty_inj");
    if (j.contains("penalty_flow"))
        c.penalty_flow = detail::get_number(j["penalty_flow"], "penalty_flow");
    if (j.contains("base_mva")) c.base_mva = detail::get_number(j["base_mva"], "base_mva");

    // entities may appear in any order in the file; store them id-sorted
    std::sort(c.buses.begin(), c.buses.end(), [](auto& a, auto& b) { return a.id < b.id; });
    std::sort(c.lines.begin(), c.lines.end(), [](auto& a, auto& b) { return a.id < b.id; });
    std::sort(c.generators.begin(), c.generators.end(),
              [](auto& a, auto& b) { return a.id < b.id; });
    std::sort(c.demands.begin(), c.demands.end(), [](auto& a, auto& b) { return a.id < b.id; });

    validate(c);
    return c;
}

inline nlohmann::ordered_json curve_to_json(const PwlCurve& curve) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : curve.segments) arr.push_back({s.slope, s.width});
    return arr;
}

inline std::string serialize(const GridCase& c) {
    nlohmann::ordered_json j;
    j["buses"] = nlohmann::ordered_json::array();
    for (const auto& b : c.buses) {
        nlohmann::ordered_json v{{"id", b.id}};
        if (b.is_slack) v["slack"] = true;
        j["buses"].push_back(v);
    }
    j["lines"] = nlohmann::ordered_json::array();
    for (const auto& l : c.lines)
        j["lines"].push_back({{"id", l.id},
                              {"from", l.from_bus},
                              {"to", l.to_bus},
                              {"susceptance", l.susceptance},
                              {"limit_base", l.flow_limit_base},
                              {"limit_ctg", l.flow_limit_ctg}});
    j["generators"] = nlohmann::ordered_json::array();
    for (const auto& g : c.generators)
        j["generators"].push_back({{"id", g.id},
                                   {"bus", g.bus},
                                   {"p_min", g.p_min},
                                   {"p_max", g.p_max},
                                   {"cost", curve_to_json(g.cost_curve)}});
    j["demands"] = nlohmann::ordered_json::array();
    for (const auto& d : c.demands)
        j["demands"].push_back({{"id", d.id},
                                {"bus", d.bus},
                                {"p_min", d.p_min},
                                {"p_max", d.p_max},
                                {"benefit", curve_to_json(d.benefit_curve)}});
    j["contingencies"] = c.contingencies;
    j["tau"] = c.tau;
    j["penalty_inj"] = c.penalty_inj;
    j["penalty_flow"] = c.penalty_flow;
    if (c.base_mva) j["base_mva"] = *c.base_mva;
    return j.dump(2) + "\n";
}

// Sparse bus-aggregation maps: p_inj = gen_to_bus * p_g - demand_to_bus * p_d.
// Each column holds exactly one unit entry at the device's bus.
struct InjectionMap {
    Eigen::SparseMatrix<double> gen_to_bus;     // n_b x n_g
    Eigen::SparseMatrix<double> demand_to_bus;  // n_b x n_d

    VectorXd apply(const VectorXd& p_g, const VectorXd& p_d) const {
        if (p_g.size() != gen_to_bus.cols() || p_d.size() != demand_to_bus.cols())
            throw DimensionError("injection map: dispatch lengths do not match device counts");
        return gen_to_bus * p_g - demand_to_bus * p_d;
    }

    // Dense [A_g  -A_d] acting on the concatenated (p_g, p_d) vector.
    MatrixXd dense_operator() const {
        MatrixXd W(gen_to_bus.rows(), gen_to_bus.cols() + demand_to_bus.cols());
        W.setZero();
        W.leftCols(gen_to_bus.cols()) = MatrixXd(gen_to_bus);
        W.rightCols(demand_to_bus.cols()) = -MatrixXd(demand_to_bus);
        return W;
    }
};

inline InjectionMap net_injection_map(const GridCase& c) {
    InjectionMap m;
    m.gen_to_bus.resize(c.n_buses(), c.n_gens());
    m.demand_to_bus.resize(c.n_buses(), c.n_demands());
    std::vector<Eigen::Triplet<double>> tg, td;
    for (const auto& g : c.generators) tg.emplace_back(g.bus, g.id, 1.0);
    for (const auto& d : c.demands) td.emplace_back(d.bus, d.id, 1.0);
    m.gen_to_bus.setFromTriplets(tg.begin(), tg.end());
    m.demand_to_bus.setFromTriplets(td.begin(), td.end());
    return m;
}

// Hard device limits as one interval over the concatenated (p_g, p_d) input.
inline IntervalVec device_box(const GridCase& c) {
    VectorXd lo(c.n_gens() + c.n_demands()), hi(lo.size());
    for (const auto& g : c.generators) {
        lo[g.id] = g.p_min;
        hi[g.id] = g.p_max;
    }
    for (const auto& d : c.demands) {
        lo[c.n_gens() + d.id] = d.p_min;
        hi[c.n_gens() + d.id] = d.p_max;
    }
    return IntervalVec(lo, hi);
}

}  // namespace gridbound
