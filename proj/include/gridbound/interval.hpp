#pragma once

#include <Eigen/Dense>
#include <utility>

#include "gridbound/errors.hpp"

namespace gridbound {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Closed scalar interval. Plain aggregate; invariants are enforced where
// instances are produced.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double v) const { return lower <= v && v <= upper; }
    double width() const { return upper - lower; }
};

inline Interval make_interval(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)))
        throw Error("interval endpoints must be finite");
    if (lo > hi) throw Error("interval lower exceeds upper");
    return Interval{lo, hi};
}

// Element-wise closed interval vector. lower[k] <= upper[k], all entries
// finite; NaN is rejected at construction and can never propagate.
class IntervalVec {
public:
    IntervalVec() = default;

    IntervalVec(VectorXd lower, VectorXd upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size())
            throw DimensionError("interval lower/upper lengths differ");
        if (!lower_.allFinite() || !upper_.allFinite())
            throw Error("interval bounds must be finite (no NaN/inf)");
        if (((upper_ - lower_).array() < 0.0).any())
            throw Error("interval lower exceeds upper");
    }

    static IntervalVec degenerate(const VectorXd& point) { return IntervalVec(point, point); }

    Eigen::Index size() const { return lower_.size(); }
    const VectorXd& lower() const { return lower_; }
    const VectorXd& upper() const { return upper_; }

    VectorXd center() const { return 0.5 * (lower_ + upper_); }
    VectorXd radius() const { return 0.5 * (upper_ - lower_); }

    bool contains(const VectorXd& x, double tol = 0.0) const {
        if (x.size() != size()) return false;
        return ((x - lower_).array() >= -tol).all() && ((upper_ - x).array() >= -tol).all();
    }

    bool contained_in(const IntervalVec& outer) const {
        return outer.size() == size() && (lower_.array() >= outer.lower_.array()).all() &&
               (upper_.array() <= outer.upper_.array()).all();
    }

    IntervalVec segment(Eigen::Index start, Eigen::Index len) const {
        return IntervalVec(lower_.segment(start, len), upper_.segment(start, len));
    }

private:
    VectorXd lower_;
    VectorXd upper_;
};

// x0 - eps, x0 + eps with eps >= 0 element-wise.
inline IntervalVec from_box(const VectorXd& center, const VectorXd& radius) {
    if (center.size() != radius.size())
        throw DimensionError("from_box: center/radius lengths differ");
    if ((radius.array() < 0.0).any())
        throw NegativeRadiusError("from_box: radius must be nonnegative");
    return IntervalVec(center - radius, center + radius);
}

// y = W x + b propagated as y_mu = W x_mu + b, y_sigma = |W| x_sigma.
// The |W| overload lets callers reuse a cached absolute matrix.
inline IntervalVec affine(const MatrixXd& W, const MatrixXd& absW, const VectorXd& b,
                          const IntervalVec& x) {
    if (W.cols() != x.size())
        throw DimensionError("affine: W columns do not match input length");
    if (b.size() != W.rows()) throw DimensionError("affine: bias length does not match W rows");
    const VectorXd mu = W * x.center() + b;
    const VectorXd sigma = absW * x.radius();
    return IntervalVec(mu - sigma, mu + sigma);
}

inline IntervalVec affine(const MatrixXd& W, const VectorXd& b, const IntervalVec& x) {
    return affine(W, W.cwiseAbs(), b, x);
}

// Exact interval image of |.|.
inline IntervalVec abs_iv(const IntervalVec& x) {
    VectorXd lo(x.size()), hi(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double a = x.lower()[k], b = x.upper()[k];
        hi[k] = std::max(std::abs(a), std::abs(b));
        lo[k] = (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
    }
    return IntervalVec(std::move(lo), std::move(hi));
}

inline IntervalVec relu_iv(const IntervalVec& x) {
    return IntervalVec(x.lower().cwiseMax(0.0), x.upper().cwiseMax(0.0));
}

// max(x, c): clips the lower end up to c.
inline IntervalVec clip_min_const(const IntervalVec& x, double c) {
    return IntervalVec(x.lower().cwiseMax(c), x.upper().cwiseMax(c));
}

// min(x, c): clips the upper end down to c.
inline IntervalVec clip_max_const(const IntervalVec& x, double c) {
    return IntervalVec(x.lower().cwiseMin(c), x.upper().cwiseMin(c));
}

inline IntervalVec add(const IntervalVec& x, const IntervalVec& y) {
    if (x.size() != y.size()) throw DimensionError("add: interval lengths differ");
    return IntervalVec(x.lower() + y.lower(), x.upper() + y.upper());
}

inline IntervalVec add_const(const IntervalVec& x, const VectorXd& c) {
    if (x.size() != c.size()) throw DimensionError("add_const: lengths differ");
    return IntervalVec(x.lower() + c, x.upper() + c);
}

inline IntervalVec neg(const IntervalVec& x) { return IntervalVec(-x.upper(), -x.lower()); }

inline IntervalVec scale(double c, const IntervalVec& x) {
    if (c >= 0.0) return IntervalVec(c * x.lower(), c * x.upper());
    return IntervalVec(c * x.upper(), c * x.lower());
}

inline Interval scale(double c, const Interval& x) {
    return c >= 0.0 ? Interval{c * x.lower, c * x.upper} : Interval{c * x.upper, c * x.lower};
}

inline Interval add(const Interval& x, const Interval& y) {
    return Interval{x.lower + y.lower, x.upper + y.upper};
}

inline Interval sum_all(const IntervalVec& x) {
    return Interval{x.lower().sum(), x.upper().sum()};
}

// Element-wise product with a constant matrix (endpoint swap under negative
// entries), applied entry by entry.
inline IntervalVec hadamard_const(const MatrixXd& A, const IntervalVec& x) {
    if (A.size() != x.size())
        throw DimensionError("hadamard_const: constant size does not match interval");
    VectorXd lo(x.size()), hi(x.size());
    const double* a = A.data();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double p = a[k] * x.lower()[k];
        const double q = a[k] * x.upper()[k];
        lo[k] = std::min(p, q);
        hi[k] = std::max(p, q);
    }
    return IntervalVec(std::move(lo), std::move(hi));
}

// Interval matrix, used by the loop-free contingency block where whole
// n_ctg x n_l flow tables propagate at once.
class IntervalMat {
public:
    IntervalMat() = default;

    IntervalMat(MatrixXd lower, MatrixXd upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.rows() != upper_.rows() || lower_.cols() != upper_.cols())
            throw DimensionError("interval matrix lower/upper shapes differ");
        if (!lower_.allFinite() || !upper_.allFinite())
            throw Error("interval bounds must be finite (no NaN/inf)");
        if (((upper_ - lower_).array() < 0.0).any())
            throw Error("interval lower exceeds upper");
    }

    Eigen::Index rows() const { return lower_.rows(); }
    Eigen::Index cols() const { return lower_.cols(); }
    const MatrixXd& lower() const { return lower_; }
    const MatrixXd& upper() const { return upper_; }

private:
    MatrixXd lower_;
    MatrixXd upper_;
};

inline IntervalMat hadamard_const(const MatrixXd& A, const IntervalMat& X) {
    if (A.rows() != X.rows() || A.cols() != X.cols())
        throw DimensionError("hadamard_const: shapes disagree");
    MatrixXd p = A.cwiseProduct(X.lower());
    MatrixXd q = A.cwiseProduct(X.upper());
    return IntervalMat(p.cwiseMin(q), p.cwiseMax(q));
}

// Replicates a line-flow interval across rows: row k of the result is x.
inline IntervalMat replicate_rows(const IntervalVec& x, Eigen::Index rows) {
    return IntervalMat(x.lower().transpose().replicate(rows, 1),
                       x.upper().transpose().replicate(rows, 1));
}

// Broadcasts a per-row interval across columns: column l of the result is v.
inline IntervalMat replicate_cols(const IntervalVec& v, Eigen::Index cols) {
    return IntervalMat(v.lower().replicate(1, cols), v.upper().replicate(1, cols));
}

inline IntervalMat sub(const IntervalMat& x, const IntervalMat& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols())
        throw DimensionError("sub: shapes disagree");
    return IntervalMat(x.lower() - y.upper(), x.upper() - y.lower());
}

inline IntervalMat abs_iv(const IntervalMat& x) {
    MatrixXd albs = x.lower().cwiseAbs();
    MatrixXd aubs = x.upper().cwiseAbs();
    MatrixXd hi = albs.cwiseMax(aubs);
    MatrixXd lo = albs.cwiseMin(aubs);
    // straddling entries reach zero
    lo = (x.lower().array() <= 0.0 && x.upper().array() >= 0.0).select(0.0, lo);
    return IntervalMat(std::move(lo), std::move(hi));
}

inline IntervalMat relu_iv(const IntervalMat& x) {
    return IntervalMat(x.lower().cwiseMax(0.0), x.upper().cwiseMax(0.0));
}

// Subtracts cap[l] from every entry of column l.
inline IntervalMat sub_row_const(const IntervalMat& x, const VectorXd& cap) {
    if (cap.size() != x.cols()) throw DimensionError("sub_row_const: cap length != columns");
    MatrixXd lo = x.lower();
    MatrixXd hi = x.upper();
    lo.rowwise() -= cap.transpose();
    hi.rowwise() -= cap.transpose();
    return IntervalMat(std::move(lo), std::move(hi));
}

inline Interval sum_all(const IntervalMat& x) {
    return Interval{x.lower().sum(), x.upper().sum()};
}

}  // namespace gridbound
