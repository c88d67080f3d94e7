#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gridbound/errors.hpp"
#include "gridbound/grid_model.hpp"
#include "gridbound/parallel.hpp"

namespace gridbound {

using SparseMat = Eigen::SparseMatrix<double>;

// Index of a non-slack bus after the slack column/row is removed.
inline int reduced_index(int bus, int slack) { return bus < slack ? bus : bus - 1; }

struct Incidence {
    SparseMat E;    // n_l x n_b, +1 at from_bus, -1 at to_bus
    SparseMat E_r;  // slack column dropped, column order otherwise preserved
};

inline Incidence build_incidence(const GridCase& c) {
    const int slack = c.slack_bus();
    Incidence inc;
    inc.E.resize(c.n_lines(), c.n_buses());
    inc.E_r.resize(c.n_lines(), c.n_buses() - 1);
    std::vector<Eigen::Triplet<double>> te, tr;
    for (const auto& l : c.lines) {
        te.emplace_back(l.id, l.from_bus, 1.0);
        te.emplace_back(l.id, l.to_bus, -1.0);
        if (l.from_bus != slack) tr.emplace_back(l.id, reduced_index(l.from_bus, slack), 1.0);
        if (l.to_bus != slack) tr.emplace_back(l.id, reduced_index(l.to_bus, slack), -1.0);
    }
    inc.E.setFromTriplets(te.begin(), te.end());
    inc.E_r.setFromTriplets(tr.begin(), tr.end());
    return inc;
}

// Incidence, line admittances, the factorized reduced nodal admittance
// Y_B,r = E_r^T Y_D E_r, and the full zero-padded PTDF. Immutable after
// build; the factorization handle is shared read-only by contingency
// precompute (LDLT solves are const).
struct NetworkMatrices {
    SparseMat E;
    SparseMat E_r;
    VectorXd y_diag;               // diagonal of Y_D
    Eigen::LDLT<MatrixXd> YBr_factor;
    MatrixXd Phi;                  // n_l x n_b, slack column all zeros
    int slack = 0;

    int n_buses() const { return static_cast<int>(E.cols()); }
    int n_lines() const { return static_cast<int>(E.rows()); }

    // E^T Phi - I: maps any injection to its nodal imbalance residual.
    // Annihilates balanced injections.
    MatrixXd nodal_imbalance_operator() const {
        MatrixXd R = SparseMat(E.transpose()) * Phi;
        R.diagonal().array() -= 1.0;
        return R;
    }
};

// Assembles Y_B,r and the full PTDF via factorize-and-solve; the inverse of
// Y_B,r is never formed.
inline NetworkMatrices build_ptdf(const GridCase& c, unsigned threads = 1) {
    NetworkMatrices nm;
    nm.slack = c.slack_bus();
    Incidence inc = build_incidence(c);
    nm.E = std::move(inc.E);
    nm.E_r = std::move(inc.E_r);

    const int nb = c.n_buses();
    const int nl = c.n_lines();
    const int nr = nb - 1;

    nm.y_diag.resize(nl);
    for (const auto& l : c.lines) nm.y_diag[l.id] = l.susceptance;

    MatrixXd Y = MatrixXd::Zero(nr, nr);
    for (const auto& l : c.lines) {
        const double y = l.susceptance;
        const int rf = l.from_bus == nm.slack ? -1 : reduced_index(l.from_bus, nm.slack);
        const int rt = l.to_bus == nm.slack ? -1 : reduced_index(l.to_bus, nm.slack);
        if (rf >= 0) Y(rf, rf) += y;
        if (rt >= 0) Y(rt, rt) += y;
        if (rf >= 0 && rt >= 0) {
            Y(rf, rt) -= y;
            Y(rt, rf) -= y;
        }
    }

    nm.YBr_factor.compute(Y);
    if (nr > 0) {
        const double scale = Y.cwiseAbs().maxCoeff();
        const double pivot_floor = 1e-12 * std::max(scale, 1.0);
        if (nm.YBr_factor.info() != Eigen::Success ||
            nm.YBr_factor.vectorD().minCoeff() < pivot_floor)
            throw SingularMatrixError(
                "reduced nodal admittance is numerically singular (disconnected network or "
                "degenerate susceptances)");
    }

    // Phi_r^T = Y_B,r^{-1} (E_r^T Y_D), solved column-block-parallel against
    // the shared factorization.
    MatrixXd rhs = MatrixXd::Zero(nr, nl);
    for (const auto& l : c.lines) {
        const double y = l.susceptance;
        if (l.from_bus != nm.slack) rhs(reduced_index(l.from_bus, nm.slack), l.id) = y;
        if (l.to_bus != nm.slack) rhs(reduced_index(l.to_bus, nm.slack), l.id) = -y;
    }
    MatrixXd Z(nr, nl);
    const unsigned tn = resolve_threads(threads);
    if (tn <= 1 || nl < 64) {
        Z = nm.YBr_factor.solve(rhs);
    } else {
        const int blocks = static_cast<int>(tn);
        const int per = (nl + blocks - 1) / blocks;
        parallel_for(static_cast<std::size_t>(blocks), tn, [&](std::size_t bidx) {
            const int lo = static_cast<int>(bidx) * per;
            const int hi = std::min(nl, lo + per);
            if (lo < hi) Z.middleCols(lo, hi - lo) = nm.YBr_factor.solve(rhs.middleCols(lo, hi - lo));
        });
    }

    nm.Phi = MatrixXd::Zero(nl, nb);
    for (int b = 0; b < nb; ++b) {
        if (b == nm.slack) continue;  // zero padding at the slack column
        nm.Phi.col(b) = Z.row(reduced_index(b, nm.slack)).transpose();
    }
    return nm;
}

inline VectorXd base_flows(const NetworkMatrices& nm, const VectorXd& p_inj) {
    if (p_inj.size() != nm.Phi.cols())
        throw DimensionError("base_flows: injection length does not match bus count");
    return nm.Phi * p_inj;
}

}  // namespace gridbound
