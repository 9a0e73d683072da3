#pragma once

// Two-phase dense tableau simplex with Bland's rule.
//
// Solves   min c'x  s.t.  A x (<=|>=|=) b,  x >= 0
//
// The tableau is an Eigen matrix templated on the scalar type so the same
// code runs in double for production and in long double for cross-checks.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "orsynth/model_ir.hpp"

namespace orsynth {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct StandardFormLp {
    DenseMatrix<Scalar> A;
    DenseVector<Scalar> b;
    std::vector<Sense> senses;
    DenseVector<Scalar> c;
};

template <typename Scalar>
struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    DenseVector<Scalar> x;
    Scalar objective = 0;
    long pivots = 0;
};

template <typename Scalar>
class DenseSimplex {
public:
    struct Tolerances {
        Scalar pivot = Scalar(1e-9);
        Scalar feasibility = Scalar(1e-7);
    };

    explicit DenseSimplex(Tolerances tol = {}) : tol_(tol) {}

    LpSolution<Scalar> solve(const StandardFormLp<Scalar>& lp) {
        const Eigen::Index m = lp.A.rows();
        const Eigen::Index n = lp.A.cols();
        if (lp.b.size() != m || lp.c.size() != n || static_cast<Eigen::Index>(lp.senses.size()) != m)
            throw std::invalid_argument("DenseSimplex: inconsistent problem dimensions");

        // Column layout: structural | slack/surplus (one per inequality) | artificial.
        std::vector<Sense> senses = lp.senses;
        DenseMatrix<Scalar> A = lp.A;
        DenseVector<Scalar> b = lp.b;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (b(i) < 0) {
                A.row(i) = -A.row(i);
                b(i) = -b(i);
                if (senses[i] == Sense::Le)
                    senses[i] = Sense::Ge;
                else if (senses[i] == Sense::Ge)
                    senses[i] = Sense::Le;
            }
        }
        Eigen::Index n_slack = 0, n_art = 0;
        for (auto s : senses) {
            if (s != Sense::Eq) ++n_slack;
            if (s != Sense::Le) ++n_art;
        }
        n_struct_ = n;
        art_begin_ = n + n_slack;
        const Eigen::Index cols = art_begin_ + n_art;
        rhs_ = cols;

        T_ = DenseMatrix<Scalar>::Zero(m + 1, cols + 1);
        T_.topLeftCorner(m, n) = A;
        T_.block(0, rhs_, m, 1) = b;
        basis_.assign(static_cast<std::size_t>(m), 0);
        Eigen::Index slack = n, art = art_begin_;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (senses[i] == Sense::Le) {
                T_(i, slack) = 1;
                basis_[i] = slack++;
            } else if (senses[i] == Sense::Ge) {
                T_(i, slack++) = -1;
                T_(i, art) = 1;
                basis_[i] = art++;
            } else {
                T_(i, art) = 1;
                basis_[i] = art++;
            }
        }

        LpSolution<Scalar> out;
        pivots_ = 0;
        // Phase-one residuals below the rounding noise of the largest right-hand side count as zero.
        const Scalar b_scale = std::max<Scalar>(Scalar(1), b.size() ? b.cwiseAbs().maxCoeff() : 0);
        const Scalar residual_tol =
            std::max(tol_.feasibility,
                     Scalar(64) * std::numeric_limits<Scalar>::epsilon() * b_scale * Scalar(m + 1));

        if (n_art > 0) {
            DenseVector<Scalar> phase1 = DenseVector<Scalar>::Zero(cols);
            phase1.segment(art_begin_, n_art).setOnes();
            load_objective(phase1);
            run(cols);  // phase one is bounded below by zero
            if (-T_(m, rhs_) > residual_tol) {
                out.status = LpStatus::Infeasible;
                out.pivots = pivots_;
                return out;
            }
            drive_out_artificials();
        }

        DenseVector<Scalar> phase2 = DenseVector<Scalar>::Zero(cols);
        phase2.head(n) = lp.c;
        load_objective(phase2);
        if (!run(art_begin_)) {
            out.status = LpStatus::Unbounded;
            out.pivots = pivots_;
            return out;
        }

        out.status = LpStatus::Optimal;
        out.x = DenseVector<Scalar>::Zero(n);
        for (Eigen::Index i = 0; i < m; ++i)
            if (basis_[i] < n) out.x(basis_[i]) = std::max<Scalar>(Scalar(0), T_(i, rhs_));
        out.objective = lp.c.dot(out.x);
        out.pivots = pivots_;
        return out;
    }

private:
    static constexpr long kMaxPivots = 1'000'000;

    Eigen::Index rows() const { return T_.rows() - 1; }

    void load_objective(const DenseVector<Scalar>& cost) {
        const Eigen::Index m = rows();
        T_.row(m).setZero();
        T_.row(m).head(cost.size()) = cost.transpose();
        for (Eigen::Index i = 0; i < m; ++i) {
            Scalar cb = cost(basis_[i]);
            if (cb != Scalar(0)) T_.row(m) -= cb * T_.row(i);
        }
    }

    void pivot(Eigen::Index r, Eigen::Index s) {
        T_.row(r) /= T_(r, s);
        Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pivot_row = T_.row(r);
        DenseVector<Scalar> factors = T_.col(s);
        factors(r) = 0;
        T_.noalias() -= factors * pivot_row;
        T_(r, s) = 1;
        for (Eigen::Index i = 0; i <= rows(); ++i)
            if (i != r) T_(i, s) = 0;
        basis_[r] = s;
        ++pivots_;
    }

    // Bland's rule: lowest-index improving column, lowest-index basic variable on ratio ties.
    // Returns false when the objective is unbounded below.
    bool run(Eigen::Index entering_limit) {
        const Eigen::Index m = rows();
        while (true) {
            if (pivots_ > kMaxPivots) throw std::runtime_error("DenseSimplex: pivot limit exceeded");
            Eigen::Index s = -1;
            for (Eigen::Index j = 0; j < entering_limit; ++j) {
                if (T_(m, j) < -tol_.pivot) {
                    s = j;
                    break;
                }
            }
            if (s < 0) return true;
            Eigen::Index r = -1;
            Scalar best = 0;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (T_(i, s) <= tol_.pivot) continue;
                Scalar ratio = T_(i, rhs_) / T_(i, s);
                if (r < 0 || ratio < best - tol_.pivot ||
                    (std::abs(ratio - best) <= tol_.pivot && basis_[i] < basis_[r])) {
                    r = i;
                    best = ratio;
                }
            }
            if (r < 0) return false;
            pivot(r, s);
        }
    }

    void drive_out_artificials() {
        const Eigen::Index m = rows();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (basis_[i] < art_begin_) continue;
            Eigen::Index best = -1;
            for (Eigen::Index j = 0; j < art_begin_; ++j) {
                if (std::abs(T_(i, j)) > tol_.pivot &&
                    (best < 0 || std::abs(T_(i, j)) > std::abs(T_(i, best)) + tol_.pivot))
                    best = j;
            }
            // A row with no eligible column is redundant; its artificial stays basic at zero.
            if (best >= 0) pivot(i, best);
        }
    }

    Tolerances tol_;
    DenseMatrix<Scalar> T_;
    std::vector<Eigen::Index> basis_;
    Eigen::Index n_struct_ = 0;
    Eigen::Index art_begin_ = 0;
    Eigen::Index rhs_ = 0;
    long pivots_ = 0;
};

}  // namespace orsynth
