#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "gridbound/contingency_ops.hpp"
#include "gridbound/cost_curves.hpp"
#include "gridbound/errors.hpp"
#include "gridbound/grid_model.hpp"
#include "gridbound/interval.hpp"
#include "gridbound/network_matrices.hpp"
#include "gridbound/parallel.hpp"
#include "json.hpp"

namespace gridbound {

enum class NodeKind { Input, Affine, Abs, Relu, AddConst, SumAll, CurveSum, CtgPenalty, WeightedSum };

inline const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Input: return "input";
        case NodeKind::Affine: return "affine";
        case NodeKind::Abs: return "abs";
        case NodeKind::Relu: return "relu";
        case NodeKind::AddConst: return "add_const";
        case NodeKind::SumAll: return "sum_all";
        case NodeKind::CurveSum: return "curve_sum";
        case NodeKind::CtgPenalty: return "ctg_penalty";
        case NodeKind::WeightedSum: return "weighted_sum";
    }
    return "?";
}

namespace graph {

// Work below this many matrix entries is never split across threads.
inline constexpr Eigen::Index kParallelGrain = 1 << 18;

// One node of the static DAG. Scalars travel as length-1 vectors so both
// passes stay uniform. Nodes are immutable after the graph is built and
// evaluation is const, so one graph may serve concurrent propagations.
// `threads` caps intra-node data parallelism (row/column blocks); results
// are associated identically for every thread count except where noted.
class Node {
public:
    Node(NodeKind kind, std::string label, std::vector<int> args, Eigen::Index dim)
        : kind(kind), label(std::move(label)), args(std::move(args)), dim(dim) {}
    virtual ~Node() = default;

    virtual VectorXd eval(const std::vector<VectorXd>& vals) const = 0;
    virtual IntervalVec eval_interval(const std::vector<IntervalVec>& vals,
                                      unsigned threads) const = 0;

    NodeKind kind;
    std::string label;
    std::vector<int> args;
    Eigen::Index dim;
};

class InputNode final : public Node {
public:
    explicit InputNode(Eigen::Index dim) : Node(NodeKind::Input, "input", {}, dim) {}
    VectorXd eval(const std::vector<VectorXd>&) const override {
        throw ConsistencyError("input node is seeded, never evaluated");
    }
    IntervalVec eval_interval(const std::vector<IntervalVec>&, unsigned) const override {
        throw ConsistencyError("input node is seeded, never evaluated");
    }
};

class AffineNode final : public Node {
public:
    AffineNode(std::string label, int arg, MatrixXd W, VectorXd b)
        : Node(NodeKind::Affine, std::move(label), {arg}, W.rows()),
          W_(std::move(W)),
          b_(std::move(b)) {}

    VectorXd eval(const std::vector<VectorXd>& vals) const override {
        return W_ * vals[args[0]] + b_;
    }

    // y_mu = W x_mu + b and y_sigma = |W| x_sigma accumulated column by
    // column in one read of W. Propagation is memory-bound at scale, so a
    // cached |W| would double the traffic; the free-function affine() keeps
    // the two-product reference form and the tests pin the equivalence.
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals,
                              unsigned threads) const override {
        const IntervalVec& x = vals[args[0]];
        if (W_.cols() != x.size())
            throw DimensionError("affine: W columns do not match input length");
        const Eigen::Index rows = W_.rows();
        const Eigen::Index cols = W_.cols();
        VectorXd mu = b_;
        VectorXd sigma = VectorXd::Zero(rows);
        const VectorXd xc = x.center();
        const VectorXd xr = x.radius();
        double* mu_p = mu.data();
        double* sg_p = sigma.data();
        // each worker owns a row range; per-row accumulation order is the
        // column order for every thread count, so results do not depend on it
        auto sweep = [&](Eigen::Index r0, Eigen::Index r1) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double* col = W_.data() + j * rows;
                const double cj = xc[j];
                const double rj = xr[j];
                for (Eigen::Index i = r0; i < r1; ++i) {
                    const double w = col[i];
                    mu_p[i] += w * cj;
                    sg_p[i] += std::abs(w) * rj;
                }
            }
        };
        const unsigned tn = resolve_threads(threads);
        if (tn <= 1 || rows * cols < kParallelGrain || rows < 2 * static_cast<Eigen::Index>(tn)) {
            sweep(0, rows);
        } else {
            const Eigen::Index chunk = (rows + tn - 1) / tn;
            parallel_for(tn, tn, [&](std::size_t t) {
                const Eigen::Index r0 = static_cast<Eigen::Index>(t) * chunk;
                const Eigen::Index r1 = std::min(rows, r0 + chunk);
                if (r0 < r1) sweep(r0, r1);
            });
        }
        return IntervalVec(mu - sigma, mu + sigma);
    }

    const MatrixXd& weight() const { return W_; }

private:
    MatrixXd W_;
    VectorXd b_;
};

class AbsNode final : public Node {
public:
    AbsNode(std::string label, int arg, Eigen::Index dim)
        : Node(NodeKind::Abs, std::move(label), {arg}, dim) {}
    VectorXd eval(const std::vector<VectorXd>& vals) const override {
        return vals[args[0]].cwiseAbs();
    }
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals, unsigned) const override {
        return abs_iv(vals[args[0]]);
    }
};

class ReluNode final : public Node {
public:
    ReluNode(std::string label, int arg, Eigen::Index dim)
        : Node(NodeKind::Relu, std::move(label), {arg}, dim) {}
    VectorXd eval(const std::vector<VectorXd>& vals) const override {
        return vals[args[0]].cwiseMax(0.0);
    }
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals, unsigned) const override {
        return relu_iv(vals[args[0]]);
    }
};

class AddConstNode final : public Node {
public:
    AddConstNode(std::string label, int arg, VectorXd c)
        : Node(NodeKind::AddConst, std::move(label), {arg}, c.size()), c_(std::move(c)) {}
    VectorXd eval(const std::vector<VectorXd>& vals) const override { return vals[args[0]] + c_; }
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals, unsigned) const override {
        return add_const(vals[args[0]], c_);
    }

private:
    VectorXd c_;
};

class SumAllNode final : public Node {
public:
    SumAllNode(std::string label, int arg) : Node(NodeKind::SumAll, std::move(label), {arg}, 1) {}
    VectorXd eval(const std::vector<VectorXd>& vals) const override {
        return VectorXd::Constant(1, vals[args[0]].sum());
    }
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals, unsigned) const override {
        const Interval s = sum_all(vals[args[0]]);
        return IntervalVec(VectorXd::Constant(1, s.lower), VectorXd::Constant(1, s.upper));
    }
};

// Sum of compiled device curves over a contiguous slice of the input vector.
class CurveSumNode final : public Node {
public:
    CurveSumNode(std::string label, int arg, std::vector<CompiledCurve> curves,
                 Eigen::Index offset, bool strict_cascade)
        : Node(NodeKind::CurveSum, std::move(label), {arg}, 1),
          curves_(std::move(curves)),
          offset_(offset),
          strict_(strict_cascade) {}

    VectorXd eval(const std::vector<VectorXd>& vals) const override {
        const VectorXd& x = vals[args[0]];
        double acc = 0.0;
        for (std::size_t j = 0; j < curves_.size(); ++j)
            acc += eval_concrete(curves_[j], x[offset_ + static_cast<Eigen::Index>(j)]);
        return VectorXd::Constant(1, acc);
    }
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals, unsigned) const override {
        const IntervalVec& x = vals[args[0]];
        Interval acc{0.0, 0.0};
        for (std::size_t j = 0; j < curves_.size(); ++j) {
            const Eigen::Index k = offset_ + static_cast<Eigen::Index>(j);
            acc = add(acc, gridbound::eval_interval(curves_[j],
                                                    Interval{x.lower()[k], x.upper()[k]}, strict_));
        }
        return IntervalVec(VectorXd::Constant(1, acc.lower), VectorXd::Constant(1, acc.upper));
    }

private:
    std::vector<CompiledCurve> curves_;
    Eigen::Index offset_;
    bool strict_;
};

// Aggregate contingency violation. Consumes the base-flow vector f and the
// per-contingency injection response v = U p_inj, forms
//   P = M (x) (1 f^T) - B (x) (v 1^T),
// and reduces relu(|P| - cap) to one scalar.
class CtgPenaltyNode final : public Node {
public:
    CtgPenaltyNode(std::string label, int flow_arg, int response_arg, MatrixXd M, MatrixXd B,
                   VectorXd cap, std::vector<int> ctg_line_ids)
        : Node(NodeKind::CtgPenalty, std::move(label), {flow_arg, response_arg}, 1),
          M_(std::move(M)),
          B_(std::move(B)),
          cap_(std::move(cap)),
          ctg_line_ids_(std::move(ctg_line_ids)) {
        if (static_cast<Eigen::Index>(ctg_line_ids_.size()) != M_.rows())
            throw ConsistencyError("ctg_penalty: outage id count does not match M rows");
    }

    VectorXd eval(const std::vector<VectorXd>& vals) const override {
        const VectorXd& f = vals[args[0]];
        const VectorXd& v = vals[args[1]];
        MatrixXd P = M_.array().rowwise() * f.transpose().array();
        P.array() -= B_.array().colwise() * v.array();
        P = P.cwiseAbs();
        P.rowwise() -= cap_.transpose();
        return VectorXd::Constant(1, P.cwiseMax(0.0).sum());
    }

    // Single fused sweep; entry-wise identical to composing the
    // interval-matrix primitives (replicate, hadamard_const, sub, abs_iv,
    // sub_row_const, relu_iv, sum_all), which the unit tests assert. The
    // 0/1 mask is applied through the outage ids rather than read from M;
    // B already carries a structural zero at each row's own line. Per-line
    // partials reduce in line order, so the result does not depend on the
    // thread count.
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals,
                              unsigned threads) const override {
        const IntervalVec& f = vals[args[0]];
        const IntervalVec& v = vals[args[1]];
        if (f.size() != M_.cols() || v.size() != M_.rows())
            throw DimensionError("ctg_penalty: operand sizes disagree");
        const Eigen::Index nc = M_.rows();
        const Eigen::Index nl = M_.cols();
        VectorXd part_lo(nl), part_hi(nl);
        auto column = [&](Eigen::Index l) {
            const double flo = f.lower()[l], fhi = f.upper()[l];
            const double cap = cap_[l];
            const double* bcol = B_.col(l).data();
            double ll = 0.0, hh = 0.0;
            for (Eigen::Index k = 0; k < nc; ++k) {
                const bool masked = ctg_line_ids_[k] == static_cast<int>(l);
                const double t1lo = masked ? 0.0 : flo, t1hi = masked ? 0.0 : fhi;
                const double p = bcol[k] * v.lower()[k], q = bcol[k] * v.upper()[k];
                const double plo = t1lo - std::max(p, q);
                const double phi = t1hi - std::min(p, q);
                const double ahi = std::max(std::abs(plo), std::abs(phi));
                const double alo =
                    (plo <= 0.0 && phi >= 0.0) ? 0.0 : std::min(std::abs(plo), std::abs(phi));
                ll += std::max(alo - cap, 0.0);
                hh += std::max(ahi - cap, 0.0);
            }
            part_lo[l] = ll;
            part_hi[l] = hh;
        };
        const unsigned tn = resolve_threads(threads);
        if (tn <= 1 || nc * nl < kParallelGrain) {
            for (Eigen::Index l = 0; l < nl; ++l) column(l);
        } else {
            parallel_for(static_cast<std::size_t>(nl), tn,
                         [&](std::size_t l) { column(static_cast<Eigen::Index>(l)); });
        }
        double slo = 0.0, shi = 0.0;
        for (Eigen::Index l = 0; l < nl; ++l) {
            slo += part_lo[l];
            shi += part_hi[l];
        }
        return IntervalVec(VectorXd::Constant(1, slo), VectorXd::Constant(1, shi));
    }

    // Reference path through the interval-matrix primitives; kept for the
    // equivalence test.
    IntervalVec eval_interval_composed(const IntervalVec& f, const IntervalVec& v) const {
        IntervalMat replicated_flows = hadamard_const(M_, replicate_rows(f, M_.rows()));
        IntervalMat response_term = hadamard_const(B_, replicate_cols(v, M_.cols()));
        IntervalMat excess = sub_row_const(abs_iv(sub(replicated_flows, response_term)), cap_);
        const Interval s = sum_all(relu_iv(excess));
        return IntervalVec(VectorXd::Constant(1, s.lower), VectorXd::Constant(1, s.upper));
    }

private:
    MatrixXd M_;
    MatrixXd B_;
    VectorXd cap_;
    std::vector<int> ctg_line_ids_;
};

class WeightedSumNode final : public Node {
public:
    WeightedSumNode(std::string label, std::vector<int> args, std::vector<double> coeffs)
        : Node(NodeKind::WeightedSum, std::move(label), std::move(args), 1),
          coeffs_(std::move(coeffs)) {}

    VectorXd eval(const std::vector<VectorXd>& vals) const override {
        double acc = 0.0;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) acc += coeffs_[k] * vals[args[k]][0];
        return VectorXd::Constant(1, acc);
    }
    IntervalVec eval_interval(const std::vector<IntervalVec>& vals, unsigned) const override {
        Interval acc{0.0, 0.0};
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            const IntervalVec& t = vals[args[k]];
            acc = add(acc, scale(coeffs_[k], Interval{t.lower()[0], t.upper()[0]}));
        }
        return IntervalVec(VectorXd::Constant(1, acc.lower), VectorXd::Constant(1, acc.upper));
    }

private:
    std::vector<double> coeffs_;
};

}  // namespace graph

struct NodeInfo {
    NodeKind kind;
    std::string label;
    Eigen::Index dim;
};

struct TermBounds {
    Interval benefit;            // sum of demand benefit curves, $/h
    Interval cost;               // sum of generator cost curves, $/h
    Interval penalty_inj;        // e_inj * 1^T s_inj, $/h
    Interval penalty_flow_base;  // e_f * 1^T s_f,b, $/h
    Interval penalty_flow_ctg;   // e_f * s_agg, $/h
};

// Certified bounds on the market-surplus objective over an input box.
struct BoundReport {
    double objective_lower = 0.0;
    double objective_upper = 0.0;
    TermBounds term_bounds;
    bool infeasible_certificate = false;  // objective_upper < 0
    double wall_time_s = 0.0;
    std::string case_id;
    int time_index = 0;

    nlohmann::ordered_json to_json() const {
        auto iv = [](const Interval& v) {
            return nlohmann::ordered_json{{"lower", v.lower}, {"upper", v.upper}};
        };
        return nlohmann::ordered_json{
            {"case", case_id},
            {"time_index", time_index},
            {"lower", objective_lower},
            {"upper", objective_upper},
            {"infeasible", infeasible_certificate},
            {"terms",
             {{"benefit", iv(term_bounds.benefit)},
              {"cost", iv(term_bounds.cost)},
              {"penalty_inj", iv(term_bounds.penalty_inj)},
              {"penalty_flow_base", iv(term_bounds.penalty_flow_base)},
              {"penalty_flow_ctg", iv(term_bounds.penalty_flow_ctg)}}},
            {"wall_time_s", wall_time_s}};
    }
};

// Static DAG for the soft-constrained market-surplus objective. The input is
// the concatenated (p_g, p_d) vector; the scalar output is
//   tau * (benefit - cost - e_inj 1^T s_inj - e_f 1^T s_f,b - e_f s_agg).
class ScDcopfGraph {
public:
    Eigen::Index input_dim() const { return nodes_.front()->dim; }
    const IntervalVec& device_limits() const { return device_box_; }
    int n_gens() const { return n_gens_; }
    int n_demands() const { return n_demands_; }
    bool has_contingency_term() const { return id_ctg_ >= 0; }

    std::vector<NodeInfo> topology() const {
        std::vector<NodeInfo> out;
        out.reserve(nodes_.size());
        for (const auto& n : nodes_) out.push_back({n->kind, n->label, n->dim});
        return out;
    }

    std::size_t node_count() const { return nodes_.size(); }

    friend ScDcopfGraph build_graph(const GridCase&, const NetworkMatrices&,
                                    const ContingencyOperators&, const CompiledCurves&, bool);
    friend double evaluate_concrete(const ScDcopfGraph&, const VectorXd&, const VectorXd&);
    friend BoundReport compute_bounds(const ScDcopfGraph&, const IntervalVec&, unsigned);

private:
    int add(std::unique_ptr<graph::Node> node) {
        nodes_.push_back(std::move(node));
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<std::unique_ptr<graph::Node>> nodes_;
    IntervalVec device_box_;
    int n_gens_ = 0;
    int n_demands_ = 0;
    double tau_ = 1.0;
    double e_inj_ = 0.0;
    double e_f_ = 0.0;
    // term node ids
    int id_benefit_ = -1;
    int id_cost_ = -1;
    int id_sinj_sum_ = -1;
    int id_sfb_sum_ = -1;
    int id_ctg_ = -1;
    int id_out_ = -1;
};

// Assembles the DAG from validated artifacts. Node layout (the reference
// topology, see docs/graph_topology.md):
//   input, injection aggregation affine, imbalance slack subgraph
//   (affine/abs/sum), base-flow slack subgraph (affine/abs/add_const/relu/
//   sum), contingency slack subgraph (affine/ctg_penalty, omitted when there
//   are no contingencies), two curve_sum nodes, one weighted_sum output.
inline ScDcopfGraph build_graph(const GridCase& c, const NetworkMatrices& nm,
                                const ContingencyOperators& ops, const CompiledCurves& curves,
                                bool strict_cascade = false) {
    const int nb = c.n_buses();
    const int nl = c.n_lines();
    if (nm.Phi.rows() != nl || nm.Phi.cols() != nb)
        throw ConsistencyError("PTDF shape does not match the case");
    if (ops.n_ctg() > 0 && (ops.U.cols() != nb || ops.M.cols() != nl || ops.B.cols() != nl))
        throw ConsistencyError("contingency operator shapes do not match the case");
    if (static_cast<int>(curves.generator_cost.size()) != c.n_gens() ||
        static_cast<int>(curves.demand_benefit.size()) != c.n_demands())
        throw ConsistencyError("compiled curve counts do not match device counts");

    ScDcopfGraph g;
    g.device_box_ = device_box(c);
    g.n_gens_ = c.n_gens();
    g.n_demands_ = c.n_demands();
    g.tau_ = c.tau;
    g.e_inj_ = c.penalty_inj;
    g.e_f_ = c.penalty_flow;

    const Eigen::Index dim = c.n_gens() + c.n_demands();
    const int id_input = g.add(std::make_unique<graph::InputNode>(dim));

    const MatrixXd W_inj = net_injection_map(c).dense_operator();
    const int id_pinj = g.add(std::make_unique<graph::AffineNode>(
        "injection_aggregation", id_input, W_inj, VectorXd::Zero(nb)));

    // s_inj = |(E^T Phi - I) p_inj|
    const int id_imb = g.add(std::make_unique<graph::AffineNode>(
        "nodal_imbalance", id_pinj, nm.nodal_imbalance_operator(), VectorXd::Zero(nb)));
    const int id_sinj = g.add(std::make_unique<graph::AbsNode>("imbalance_slack", id_imb, nb));
    g.id_sinj_sum_ = g.add(std::make_unique<graph::SumAllNode>("imbalance_total", id_sinj));

    // s_f,b = relu(|Phi p_inj| - limit_base)
    const int id_flow = g.add(std::make_unique<graph::AffineNode>("base_flow", id_pinj, nm.Phi,
                                                                  VectorXd::Zero(nl)));
    const int id_flow_abs =
        g.add(std::make_unique<graph::AbsNode>("base_flow_magnitude", id_flow, nl));
    VectorXd limit_base(nl), limit_ctg(nl);
    for (const auto& l : c.lines) {
        limit_base[l.id] = l.flow_limit_base;
        limit_ctg[l.id] = l.flow_limit_ctg;
    }
    const int id_excess = g.add(std::make_unique<graph::AddConstNode>(
        "base_flow_excess", id_flow_abs, (-limit_base).eval()));
    const int id_sfb = g.add(std::make_unique<graph::ReluNode>("base_flow_slack", id_excess, nl));
    g.id_sfb_sum_ = g.add(std::make_unique<graph::SumAllNode>("base_flow_total", id_sfb));

    // aggregate contingency slack (loop-free M/B/U form)
    if (ops.n_ctg() > 0) {
        const int id_resp = g.add(std::make_unique<graph::AffineNode>(
            "ctg_injection_response", id_pinj, ops.U, VectorXd::Zero(ops.n_ctg())));
        g.id_ctg_ = g.add(std::make_unique<graph::CtgPenaltyNode>(
            "ctg_penalty", id_flow, id_resp, ops.M, ops.B, limit_ctg, ops.ctg_line_ids));
    }

    g.id_benefit_ = g.add(std::make_unique<graph::CurveSumNode>(
        "demand_benefit", id_input, curves.demand_benefit, c.n_gens(), strict_cascade));
    g.id_cost_ = g.add(std::make_unique<graph::CurveSumNode>("generator_cost", id_input,
                                                             curves.generator_cost, 0,
                                                             strict_cascade));

    std::vector<int> terms{g.id_benefit_, g.id_cost_, g.id_sinj_sum_, g.id_sfb_sum_};
    std::vector<double> coeffs{c.tau, -c.tau, -c.tau * c.penalty_inj, -c.tau * c.penalty_flow};
    if (g.id_ctg_ >= 0) {
        terms.push_back(g.id_ctg_);
        coeffs.push_back(-c.tau * c.penalty_flow);
    }
    g.id_out_ = g.add(
        std::make_unique<graph::WeightedSumNode>("objective", std::move(terms), std::move(coeffs)));
    return g;
}

namespace detail {

inline double containment_tol(double bound) { return 1e-9 * std::max(1.0, std::abs(bound)); }

inline void check_in_box(const IntervalVec& box, const VectorXd& x, const char* what) {
    if (x.size() != box.size()) throw DimensionError(std::string(what) + ": wrong input length");
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (x[k] < box.lower()[k] - containment_tol(box.lower()[k]) ||
            x[k] > box.upper()[k] + containment_tol(box.upper()[k]))
            throw DomainError(std::string(what) + ": input component " + std::to_string(k) +
                              " outside its device box");
    }
}

}  // namespace detail

// Exact objective value at one dispatch; the concrete twin of compute_bounds.
inline double evaluate_concrete(const ScDcopfGraph& g, const VectorXd& p_g, const VectorXd& p_d) {
    if (p_g.size() != g.n_gens() || p_d.size() != g.n_demands())
        throw DimensionError("evaluate_concrete: dispatch lengths do not match device counts");
    VectorXd x(g.input_dim());
    x << p_g, p_d;
    detail::check_in_box(g.device_limits(), x, "evaluate_concrete");

    std::vector<VectorXd> vals(g.nodes_.size());
    vals[0] = x;
    for (std::size_t i = 1; i < g.nodes_.size(); ++i) vals[i] = g.nodes_[i]->eval(vals);
    return vals[g.id_out_][0];
}

// Propagates the input box through every node and returns certified bounds
// with the per-term breakdown. Pure; safe to call concurrently on one graph.
// `threads` caps intra-node parallelism; 0 means all hardware threads.
inline BoundReport compute_bounds(const ScDcopfGraph& g, const IntervalVec& input_box,
                                  unsigned threads = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    if (input_box.size() != g.input_dim())
        throw DimensionError("compute_bounds: box does not match graph input dimension");
    if (!input_box.contained_in(from_box(g.device_limits().center(),
                                         (g.device_limits().radius().array() + 1e-9).matrix())))
        throw DomainError("compute_bounds: box exceeds the device limits");

    std::vector<IntervalVec> vals(g.nodes_.size());
    vals[0] = input_box;
    for (std::size_t i = 1; i < g.nodes_.size(); ++i)
        vals[i] = g.nodes_[i]->eval_interval(vals, threads);

    auto scalar = [&](int id) {
        return Interval{vals[id].lower()[0], vals[id].upper()[0]};
    };

    BoundReport r;
    r.term_bounds.benefit = scalar(g.id_benefit_);
    r.term_bounds.cost = scalar(g.id_cost_);
    r.term_bounds.penalty_inj = scale(g.e_inj_, scalar(g.id_sinj_sum_));
    r.term_bounds.penalty_flow_base = scale(g.e_f_, scalar(g.id_sfb_sum_));
    r.term_bounds.penalty_flow_ctg =
        g.id_ctg_ >= 0 ? scale(g.e_f_, scalar(g.id_ctg_)) : Interval{0.0, 0.0};
    const Interval out = scalar(g.id_out_);
    r.objective_lower = out.lower;
    r.objective_upper = out.upper;
    r.infeasible_certificate = r.objective_upper < 0.0;
    r.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Independent boxes (e.g. one per time period) against one shared graph.
// Propagation is per box; operators and |W| caches are shared.
inline std::vector<BoundReport> compute_bounds_batch(const ScDcopfGraph& g,
                                                     const std::vector<IntervalVec>& boxes,
                                                     unsigned threads = 1) {
    std::vector<BoundReport> out;
    out.reserve(boxes.size());
    for (std::size_t t = 0; t < boxes.size(); ++t) {
        out.push_back(compute_bounds(g, boxes[t], threads));
        out.back().time_index = static_cast<int>(t);
    }
    return out;
}

// (IBP upper - reference) / reference; defined only for a positive reference.
inline double gap(const BoundReport& report, double reference_optimum) {
    if (!(reference_optimum > 0.0))
        throw NonpositiveReferenceError(
            "gap undefined for non-positive reference; report raw bounds instead");
    return (report.objective_upper - reference_optimum) / reference_optimum;
}

}  // namespace gridbound
