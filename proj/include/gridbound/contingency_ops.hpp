#pragma once

#include <Eigen/Dense>
#include <queue>
#include <vector>

#include "gridbound/errors.hpp"
#include "gridbound/grid_model.hpp"
#include "gridbound/network_matrices.hpp"
#include "gridbound/parallel.hpp"

namespace gridbound {

// Absolute tolerance on the rank-1 denominator 1 + e_i^T u_i y_i. Healthy
// removals keep it O(1); it vanishes only when the outage disconnects the
// network.
inline constexpr double kIslandingTol = 1e-8;

// Precomputed loop-free contingency operators:
//   row k of M: all ones with a zero at the outaged line,
//   row k of B: b_k = M_k Y_D E_r u_k g_k,
//   row k of U: u_k = Y_B,r^{-1} e_k, zero-padded at the slack column,
// so post-outage flows for every contingency come from two matrix-vector
// products: P = M (x) (1 (Phi p)^T) - B (x) ((U p) 1^T).
struct ContingencyOperators {
    MatrixXd M;  // n_c x n_l
    MatrixXd B;  // n_c x n_l
    MatrixXd U;  // n_c x n_b
    VectorXd denominators;
    std::vector<int> ctg_line_ids;

    int n_ctg() const { return static_cast<int>(ctg_line_ids.size()); }
};

namespace detail {

struct CtgRow {
    VectorXd b;       // n_l
    VectorXd u_full;  // n_b, zero at slack
    double denom = 0.0;
    bool islanding = false;
};

inline CtgRow precompute_row(const NetworkMatrices& nm, const Line& line) {
    const int nb = nm.n_buses();
    const int line_id = line.id;
    CtgRow row;

    // e_i: i-th row of E_r
    VectorXd e = VectorXd::Zero(nb - 1);
    if (line.from_bus != nm.slack) e[reduced_index(line.from_bus, nm.slack)] = 1.0;
    if (line.to_bus != nm.slack) e[reduced_index(line.to_bus, nm.slack)] = -1.0;

    const VectorXd u = nm.YBr_factor.solve(e);
    const double y_i = -nm.y_diag[line_id];
    row.denom = 1.0 + e.dot(u) * y_i;
    if (std::abs(row.denom) < kIslandingTol) {
        row.islanding = true;
        return row;
    }
    const double g_i = y_i / row.denom;

    // b_i = M_i Y_D E_r u_i g_i
    row.b = (nm.E_r * u).cwiseProduct(nm.y_diag) * g_i;
    row.b[line_id] = 0.0;

    row.u_full = VectorXd::Zero(nb);
    for (int b = 0; b < nb; ++b)
        if (b != nm.slack) row.u_full[b] = u[reduced_index(b, nm.slack)];
    return row;
}

}  // namespace detail

// Computes u_i, g_i, b_i for every contingency once and stacks them. Solves
// run independently against the shared factorization and may be parallel.
// Throws IslandingError for the first (lowest-indexed) islanding contingency.
inline ContingencyOperators precompute(const NetworkMatrices& nm, const GridCase& c,
                                       unsigned threads = 1,
                                       std::vector<int>* skipped_islanding = nullptr) {
    const int nl = nm.n_lines();
    const int nb = nm.n_buses();
    const int nc = static_cast<int>(c.contingencies.size());

    std::vector<detail::CtgRow> rows(nc);
    parallel_for(static_cast<std::size_t>(nc), threads, [&](std::size_t k) {
        rows[k] = detail::precompute_row(nm, c.lines[c.contingencies[k]]);
    });

    int kept = 0;
    for (int k = 0; k < nc; ++k) {
        if (!rows[k].islanding) {
            ++kept;
            continue;
        }
        if (skipped_islanding == nullptr)
            throw IslandingError(c.contingencies[k],
                                 "contingency on line " + std::to_string(c.contingencies[k]) +
                                     " islands the network (rank-1 denominator vanished)");
        skipped_islanding->push_back(c.contingencies[k]);
    }

    ContingencyOperators ops;
    ops.M = MatrixXd::Ones(kept, nl);
    ops.B.resize(kept, nl);
    ops.U.resize(kept, nb);
    ops.denominators.resize(kept);
    ops.ctg_line_ids.reserve(kept);
    int out = 0;
    for (int k = 0; k < nc; ++k) {
        if (rows[k].islanding) continue;
        ops.M(out, c.contingencies[k]) = 0.0;
        ops.B.row(out) = rows[k].b.transpose();
        ops.U.row(out) = rows[k].u_full.transpose();
        ops.denominators[out] = rows[k].denom;
        ops.ctg_line_ids.push_back(c.contingencies[k]);
        ++out;
    }
    return ops;
}

// Post-outage flows for every contingency at once; row k is the flow vector
// with the outaged line's entry exactly zero.
inline MatrixXd contingency_flows(const ContingencyOperators& ops, const NetworkMatrices& nm,
                                  const VectorXd& p_inj) {
    if (p_inj.size() != nm.Phi.cols())
        throw DimensionError("contingency_flows: injection length does not match bus count");
    const VectorXd f = nm.Phi * p_inj;
    const VectorXd v = ops.U * p_inj;
    MatrixXd P = ops.M.array().rowwise() * f.transpose().array();
    P.array() -= ops.B.array().colwise() * v.array();
    return P;
}

// Ground-truth contingency flows: deletes the line, reassembles the reduced
// admittance of the surviving network, and solves it from scratch. Shares no
// precomputed state with the rank-1 path.
inline VectorXd direct_recompute_oracle(const GridCase& c, int ctg_line, const VectorXd& p_inj) {
    if (ctg_line < 0 || ctg_line >= c.n_lines())
        throw ValidationError("contingency line " + std::to_string(ctg_line) + " does not exist");
    if (p_inj.size() != c.n_buses())
        throw DimensionError("direct_recompute_oracle: injection length does not match bus count");

    // connectivity of the survivors
    std::vector<std::vector<int>> adj(c.n_buses());
    for (const auto& l : c.lines) {
        if (l.id == ctg_line) continue;
        adj[l.from_bus].push_back(l.to_bus);
        adj[l.to_bus].push_back(l.from_bus);
    }
    std::vector<bool> reached(c.n_buses(), false);
    std::queue<int> q;
    q.push(0);
    reached[0] = true;
    while (!q.empty()) {
        int b = q.front();
        q.pop();
        for (int nb : adj[b])
            if (!reached[nb]) {
                reached[nb] = true;
                q.push(nb);
            }
    }
    for (int b = 0; b < c.n_buses(); ++b)
        if (!reached[b])
            throw DisconnectedError("outage of line " + std::to_string(ctg_line) +
                                    " disconnects bus " + std::to_string(b));

    const int slack = c.slack_bus();
    const int nr = c.n_buses() - 1;
    MatrixXd Y = MatrixXd::Zero(nr, nr);
    for (const auto& l : c.lines) {
        if (l.id == ctg_line) continue;
        const int rf = l.from_bus == slack ? -1 : reduced_index(l.from_bus, slack);
        const int rt = l.to_bus == slack ? -1 : reduced_index(l.to_bus, slack);
        if (rf >= 0) Y(rf, rf) += l.susceptance;
        if (rt >= 0) Y(rt, rt) += l.susceptance;
        if (rf >= 0 && rt >= 0) {
            Y(rf, rt) -= l.susceptance;
            Y(rt, rf) -= l.susceptance;
        }
    }
    VectorXd p_r(nr);
    for (int b = 0; b < c.n_buses(); ++b)
        if (b != slack) p_r[reduced_index(b, slack)] = p_inj[b];

    const VectorXd theta_r = Eigen::LDLT<MatrixXd>(Y).solve(p_r);
    auto angle = [&](int bus) { return bus == slack ? 0.0 : theta_r[reduced_index(bus, slack)]; };

    VectorXd flows = VectorXd::Zero(c.n_lines());
    for (const auto& l : c.lines) {
        if (l.id == ctg_line) continue;  // outaged entry stays zero
        flows[l.id] = l.susceptance * (angle(l.from_bus) - angle(l.to_bus));
    }
    return flows;
}

}  // namespace gridbound
