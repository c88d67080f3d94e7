#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gridbound/bound_engine.hpp"
#include "gridbound/contingency_ops.hpp"
#include "gridbound/errors.hpp"
#include "gridbound/grid_model.hpp"

namespace gridbound {

namespace oracle_detail {

// Deterministic across platforms: raw mt19937_64 draws mapped by hand,
// never through implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }
    int uniform_int(int lo, int hi_inclusive) {  // small ranges only
        const std::uint64_t span = static_cast<std::uint64_t>(hi_inclusive - lo) + 1;
        return lo + static_cast<int>(eng_() % span);
    }
    bool coin(double p_true) { return uniform(0.0, 1.0) < p_true; }

private:
    std::mt19937_64 eng_;
};

inline double segment_walk(const PwlCurve& curve, double p_min, double x) {
    double total = 0.0;
    for (const auto& s : curve.segments) total += s.width;
    const double tol = 1e-9 * std::max(1.0, std::abs(p_min) + total);
    if (x < p_min - tol || x > p_min + total + tol)
        throw DomainError("segment walk: point outside the curve domain");
    double remaining = x - p_min;
    double acc = 0.0;
    for (const auto& s : curve.segments) {
        const double take = std::min(std::max(remaining, 0.0), s.width);
        acc += s.slope * take;
        remaining -= take;
        if (remaining <= 0.0) break;
    }
    return acc;
}

// Angle-solve base flows (Eq. (1a) then (1b) route): assembles the reduced
// admittance locally and never touches the PTDF machinery.
inline VectorXd angle_solve_flows(const GridCase& c, const VectorXd& p_inj) {
    const int slack = c.slack_bus();
    const int nr = c.n_buses() - 1;
    MatrixXd Y = MatrixXd::Zero(nr, nr);
    auto rix = [slack](int bus) { return bus < slack ? bus : bus - 1; };
    for (const auto& l : c.lines) {
        const int rf = l.from_bus == slack ? -1 : rix(l.from_bus);
        const int rt = l.to_bus == slack ? -1 : rix(l.to_bus);
        if (rf >= 0) Y(rf, rf) += l.susceptance;
        if (rt >= 0) Y(rt, rt) += l.susceptance;
        if (rf >= 0 && rt >= 0) {
            Y(rf, rt) -= l.susceptance;
            Y(rt, rf) -= l.susceptance;
        }
    }
    VectorXd p_r(nr);
    for (int b = 0; b < c.n_buses(); ++b)
        if (b != slack) p_r[rix(b)] = p_inj[b];
    const VectorXd theta = Eigen::LDLT<MatrixXd>(Y).solve(p_r);
    auto angle = [&](int bus) { return bus == slack ? 0.0 : theta[rix(bus)]; };
    VectorXd flows(c.n_lines());
    for (const auto& l : c.lines)
        flows[l.id] = l.susceptance * (angle(l.from_bus) - angle(l.to_bus));
    return flows;
}

}  // namespace oracle_detail

// Straight-line reimplementation of the market-surplus objective. Independent
// evaluation path: segment-walk curves, angle-solve flows, and an explicit
// per-contingency loop through direct_recompute_oracle. Shares no code with
// the graph pipeline it cross-checks.
inline double flat_objective(const GridCase& c, const VectorXd& p_g, const VectorXd& p_d) {
    if (p_g.size() != c.n_gens() || p_d.size() != c.n_demands())
        throw DimensionError("flat_objective: dispatch lengths do not match device counts");
    for (const auto& g : c.generators) {
        const double tol = 1e-9 * std::max(1.0, std::abs(g.p_max));
        if (p_g[g.id] < g.p_min - tol || p_g[g.id] > g.p_max + tol)
            throw DomainError("flat_objective: generator " + std::to_string(g.id) +
                              " outside its box");
    }
    for (const auto& d : c.demands) {
        const double tol = 1e-9 * std::max(1.0, std::abs(d.p_max));
        if (p_d[d.id] < d.p_min - tol || p_d[d.id] > d.p_max + tol)
            throw DomainError("flat_objective: demand " + std::to_string(d.id) +
                              " outside its box");
    }

    double benefit = 0.0, cost = 0.0;
    for (const auto& d : c.demands)
        benefit += oracle_detail::segment_walk(d.benefit_curve, d.p_min, p_d[d.id]);
    for (const auto& g : c.generators)
        cost += oracle_detail::segment_walk(g.cost_curve, g.p_min, p_g[g.id]);

    VectorXd p_inj = VectorXd::Zero(c.n_buses());
    for (const auto& g : c.generators) p_inj[g.bus] += p_g[g.id];
    for (const auto& d : c.demands) p_inj[d.bus] -= p_d[d.id];

    const VectorXd flows = oracle_detail::angle_solve_flows(c, p_inj);

    // nodal imbalance: E^T f - p_inj accumulated line by line
    VectorXd imbalance = -p_inj;
    for (const auto& l : c.lines) {
        imbalance[l.from_bus] += flows[l.id];
        imbalance[l.to_bus] -= flows[l.id];
    }
    const double s_inj = imbalance.cwiseAbs().sum();

    double s_fb = 0.0;
    for (const auto& l : c.lines)
        s_fb += std::max(std::abs(flows[l.id]) - l.flow_limit_base, 0.0);

    double s_ctg = 0.0;
    for (int id : c.contingencies) {
        const VectorXd fc = direct_recompute_oracle(c, id, p_inj);
        for (const auto& l : c.lines)
            s_ctg += std::max(std::abs(fc[l.id]) - l.flow_limit_ctg, 0.0);
    }

    return c.tau * (benefit - cost - c.penalty_inj * s_inj - c.penalty_flow * s_fb -
                    c.penalty_flow * s_ctg);
}

struct GridSearchResult {
    double value = 0.0;
    VectorXd argmax;
};

// Exhaustive tensor-grid maximization of flat_objective, box corners always
// included. resolution = points per dimension; 1 means midpoints only.
inline GridSearchResult grid_search_max(const GridCase& c, int resolution) {
    const int dims = c.n_gens() + c.n_demands();
    if (dims > 6)
        throw DimensionTooLargeError("grid search limited to 6 input dimensions, case has " +
                                     std::to_string(dims));
    if (resolution < 1) throw DomainError("grid search resolution must be >= 1");
    double total = 1.0;
    for (int d = 0; d < dims; ++d) total *= resolution;
    if (total > 2e7) throw DimensionTooLargeError("grid too large; lower the resolution");

    const IntervalVec box = device_box(c);
    std::vector<std::vector<double>> axes(dims);
    for (int d = 0; d < dims; ++d) {
        const double lo = box.lower()[d], hi = box.upper()[d];
        if (resolution == 1) {
            axes[d] = {0.5 * (lo + hi)};
        } else {
            axes[d].resize(resolution);
            for (int k = 0; k < resolution; ++k) {
                axes[d][k] = k == 0               ? lo
                             : k == resolution - 1 ? hi
                                                   : lo + (hi - lo) * k / (resolution - 1);
            }
        }
    }

    GridSearchResult best;
    best.value = -std::numeric_limits<double>::infinity();
    VectorXd x(dims);
    auto eval_point = [&](const VectorXd& point) {
        const double v =
            flat_objective(c, point.head(c.n_gens()), point.tail(c.n_demands()));
        if (v > best.value) {
            best.value = v;
            best.argmax = point;
        }
    };

    // tensor grid via odometer
    std::vector<int> idx(dims, 0);
    while (true) {
        for (int d = 0; d < dims; ++d) x[d] = axes[d][idx[d]];
        eval_point(x);
        int d = 0;
        for (; d < dims; ++d) {
            if (++idx[d] < static_cast<int>(axes[d].size())) break;
            idx[d] = 0;
        }
        if (d == dims) break;
    }
    // explicit corner sweep
    for (std::uint64_t mask = 0; mask < (1ull << dims); ++mask) {
        for (int d = 0; d < dims; ++d)
            x[d] = (mask >> d) & 1 ? box.upper()[d] : box.lower()[d];
        eval_point(x);
    }
    return best;
}

// Counts flat-objective values falling outside [lower, upper] over uniform
// samples plus (for <= 12 dimensions) every box corner. Deterministic under
// the seed, fixed evaluation order.
inline int count_bound_violations(const GridCase& c, int n_samples, std::uint64_t seed,
                                  double lower, double upper) {
    if (n_samples < 1) throw DomainError("need at least one sample");
    const IntervalVec box = device_box(c);
    const int dims = static_cast<int>(box.size());
    int violations = 0;
    VectorXd x(dims);
    auto check = [&](const VectorXd& point) {
        const double v = flat_objective(c, point.head(c.n_gens()), point.tail(c.n_demands()));
        if (v < lower || v > upper) ++violations;
    };
    if (dims <= 12) {
        for (std::uint64_t mask = 0; mask < (1ull << dims); ++mask) {
            for (int d = 0; d < dims; ++d)
                x[d] = (mask >> d) & 1 ? box.upper()[d] : box.lower()[d];
            check(x);
        }
    }
    oracle_detail::Rng rng(seed);
    for (int s = 0; s < n_samples; ++s) {
        for (int d = 0; d < dims; ++d) x[d] = rng.uniform(box.lower()[d], box.upper()[d]);
        check(x);
    }
    return violations;
}

// Empirical falsification attempt against the certified interval; must
// return zero for sound bounds.
inline int sample_soundness(const GridCase& c, const ScDcopfGraph& graph, int n_samples,
                            std::uint64_t seed) {
    const BoundReport r = compute_bounds(graph, device_box(c));
    return count_bound_violations(c, n_samples, seed, r.objective_lower, r.objective_upper);
}

// Connected random instance: spanning tree plus extra edges up to
// round(density * (n_buses - 1)) lines, susceptances in [1, 10], devices and
// curves honoring every model invariant. Contingencies are exactly the
// non-bridge lines. Byte-identical output under one seed.
inline GridCase random_case(int n_buses, double density, std::uint64_t seed) {
    if (n_buses < 2) throw ValidationError("random_case needs at least 2 buses");
    oracle_detail::Rng rng(seed);
    GridCase c;

    const int slack = rng.uniform_int(0, n_buses - 1);
    for (int b = 0; b < n_buses; ++b) c.buses.push_back({b, b == slack});

    // random-attachment spanning tree
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<bool>> used(n_buses, std::vector<bool>(n_buses, false));
    for (int b = 1; b < n_buses; ++b) {
        const int parent = rng.uniform_int(0, b - 1);
        edges.emplace_back(parent, b);
        used[parent][b] = used[b][parent] = true;
    }
    const long target = std::max<long>(n_buses - 1, std::lround(density * (n_buses - 1)));
    long extras = target - (n_buses - 1);
    if (extras > 0) {
        std::vector<std::pair<int, int>> free_pairs;
        for (int a = 0; a < n_buses; ++a)
            for (int b = a + 1; b < n_buses; ++b)
                if (!used[a][b]) free_pairs.emplace_back(a, b);
        extras = std::min<long>(extras, static_cast<long>(free_pairs.size()));
        for (long k = 0; k < extras; ++k) {  // partial Fisher-Yates draw
            const int pick = rng.uniform_int(static_cast<int>(k),
                                             static_cast<int>(free_pairs.size()) - 1);
            std::swap(free_pairs[k], free_pairs[pick]);
            edges.push_back(free_pairs[k]);
        }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [a, b] = edges[i];
        if (rng.coin(0.5)) std::swap(a, b);
        Line l;
        l.id = static_cast<int>(i);
        l.from_bus = a;
        l.to_bus = b;
        l.susceptance = rng.uniform(1.0, 10.0);
        l.flow_limit_base = rng.uniform(0.6, 2.5);
        l.flow_limit_ctg = l.flow_limit_base * rng.uniform(1.0, 1.3);
        c.lines.push_back(l);
    }

    auto make_curve = [&rng](CurveKind kind, double span) {
        PwlCurve curve;
        curve.kind = kind;
        const int nseg = rng.uniform_int(1, 3);
        std::vector<double> slopes(nseg);
        for (auto& s : slopes)
            s = kind == CurveKind::ConvexCost ? rng.uniform(0.5, 15.0) : rng.uniform(1.0, 30.0);
        std::sort(slopes.begin(), slopes.end());
        if (kind == CurveKind::ConcaveBenefit) std::reverse(slopes.begin(), slopes.end());
        const double total = span * (1.0 + rng.uniform(0.05, 0.4));
        std::vector<double> weights(nseg);
        double wsum = 0.0;
        for (auto& w : weights) {
            w = rng.uniform(0.2, 1.0);
            wsum += w;
        }
        for (int i = 0; i < nseg; ++i) curve.segments.push_back({slopes[i], total * weights[i] / wsum});
        return curve;
    };

    const int n_g = 1 + rng.uniform_int(0, std::max(0, n_buses / 3));
    const int n_d = 1 + rng.uniform_int(0, std::max(0, n_buses / 3));
    for (int i = 0; i < n_g; ++i) {
        Generator g;
        g.id = i;
        g.bus = rng.uniform_int(0, n_buses - 1);
        g.p_min = rng.coin(0.7) ? 0.0 : rng.uniform(0.0, 0.3);
        g.p_max = g.p_min + rng.uniform(0.1, 1.2);
        g.cost_curve = make_curve(CurveKind::ConvexCost, g.p_max - g.p_min);
        c.generators.push_back(g);
    }
    for (int i = 0; i < n_d; ++i) {
        Demand d;
        d.id = i;
        d.bus = rng.uniform_int(0, n_buses - 1);
        d.p_min = rng.coin(0.8) ? 0.0 : rng.uniform(0.0, 0.2);
        d.p_max = d.p_min + rng.uniform(0.1, 1.0);
        d.benefit_curve = make_curve(CurveKind::ConcaveBenefit, d.p_max - d.p_min);
        c.demands.push_back(d);
    }

    c.tau = rng.uniform(0.5, 2.0);
    c.penalty_inj = std::pow(10.0, rng.uniform(2.0, 5.0));
    c.penalty_flow = std::pow(10.0, rng.uniform(2.0, 5.0));

    // contingencies: every non-bridge line (bridge outages island the network)
    const int nl = c.n_lines();
    std::vector<std::vector<std::pair<int, int>>> adj(n_buses);  // (neighbor, line id)
    for (const auto& l : c.lines) {
        adj[l.from_bus].emplace_back(l.to_bus, l.id);
        adj[l.to_bus].emplace_back(l.from_bus, l.id);
    }
    std::vector<int> disc(n_buses, -1), low(n_buses, 0);
    std::vector<bool> is_bridge(nl, false);
    int timer = 0;
    // iterative DFS, entry edge excluded by id
    struct Frame {
        int bus;
        int via_edge;
        std::size_t next;
    };
    std::vector<Frame> stack;
    stack.push_back({0, -1, 0});
    disc[0] = low[0] = timer++;
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < adj[f.bus].size()) {
            auto [nb, eid] = adj[f.bus][f.next++];
            if (eid == f.via_edge) continue;
            if (disc[nb] == -1) {
                disc[nb] = low[nb] = timer++;
                stack.push_back({nb, eid, 0});
            } else {
                low[f.bus] = std::min(low[f.bus], disc[nb]);
            }
        } else {
            const Frame done = f;
            stack.pop_back();
            if (!stack.empty()) {
                Frame& parent = stack.back();
                low[parent.bus] = std::min(low[parent.bus], low[done.bus]);
                if (low[done.bus] > disc[parent.bus]) is_bridge[done.via_edge] = true;
            }
        }
    }
    for (int l = 0; l < nl; ++l)
        if (!is_bridge[l]) c.contingencies.push_back(l);

    validate(c);
    return c;
}

}  // namespace gridbound
