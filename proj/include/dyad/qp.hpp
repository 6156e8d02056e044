#pragma once

// Dense convex quadratic programming via an equality-seeded active-set
// iteration. Problems carry equalities, two-sided general inequalities and
// variable bounds; the working set grows one most-violated constraint at a
// time and drops constraints with wrong-signed multipliers.

#include "dyad/math.hpp"

#include <limits>
#include <string>
#include <vector>

namespace dyad {

struct QpProblem {
    MatX hessian;       ///< symmetric PSD (regularized internally)
    VecX gradient;
    MatX eq_matrix;     ///< A x = b
    VecX eq_vector;
    MatX ineq_matrix;   ///< lb <= C x <= ub
    VecX ineq_lower;
    VecX ineq_upper;
    VecX x_lower;       ///< variable bounds (may be +-inf)
    VecX x_upper;

    static QpProblem unconstrained(MatX h, VecX g)
    {
        QpProblem p;
        p.hessian = std::move(h);
        p.gradient = std::move(g);
        return p;
    }

    int n() const { return static_cast<int>(gradient.size()); }

    void validate() const
    {
        const int nv = n();
        if (hessian.rows() != nv || hessian.cols() != nv) {
            throw InvalidParameter("hessian dimension mismatch");
        }
        if ((hessian - hessian.transpose()).norm() >
            1e-10 * std::max(1.0, hessian.norm())) {
            throw InvalidParameter("hessian must be symmetric");
        }
        if (eq_matrix.size() > 0 &&
            (eq_matrix.cols() != nv || eq_matrix.rows() != eq_vector.size())) {
            throw InvalidParameter("equality block dimension mismatch");
        }
        if (ineq_matrix.size() > 0 &&
            (ineq_matrix.cols() != nv || ineq_matrix.rows() != ineq_lower.size() ||
             ineq_matrix.rows() != ineq_upper.size())) {
            throw InvalidParameter("inequality block dimension mismatch");
        }
    }
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

struct QpSolution {
    VecX x;
    VecX eq_multipliers;
    VecX ineq_multipliers;   ///< >= 0 at active upper side, <= 0 at lower
    VecX bound_multipliers;  ///< same convention, one entry per variable
    QpStatus status{QpStatus::MaxIterations};
    int iterations{0};
    double kkt_residual{std::numeric_limits<double>::infinity()};
    double max_violation{0.0};
};

struct QpOptions {
    double tolerance{1e-9};
    double regularization{1e-9};
    int max_active_set_iterations{0};  ///< 0: derived from problem size
};

namespace detail {

struct ActiveConstraint {
    int row;     // inequality row (or variable index for bounds)
    int side;    // +1 upper, -1 lower
    bool bound;  // variable bound rather than general row
};

inline bool same_constraint(const ActiveConstraint& a, const ActiveConstraint& b)
{
    return a.row == b.row && a.bound == b.bound;
}

}  // namespace detail

inline QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {})
{
    problem.validate();
    const int n = problem.n();
    const int me = static_cast<int>(problem.eq_vector.size());
    const int mi = static_cast<int>(problem.ineq_lower.size());
    const bool has_lower = problem.x_lower.size() == n;
    const bool has_upper = problem.x_upper.size() == n;
    const double inf = std::numeric_limits<double>::infinity();

    MatX h = problem.hessian;
    h.diagonal().array() += options.regularization;

    QpSolution sol;
    std::vector<detail::ActiveConstraint> active;
    std::vector<detail::ActiveConstraint> solved_active;
    const int max_iter = options.max_active_set_iterations > 0
                             ? options.max_active_set_iterations
                             : 50 + 10 * (mi + n);

    VecX x = VecX::Zero(n);
    VecX eq_mult = VecX::Zero(me);
    VecX act_mult;
    int last_dropped_row = -1;
    bool last_dropped_bound = false;

    for (int iter = 0; iter < max_iter; ++iter) {
        sol.iterations = iter + 1;
        const int ma = static_cast<int>(active.size());
        const int dim = n + me + ma;
        MatX kkt = MatX::Zero(dim, dim);
        VecX rhs = VecX::Zero(dim);
        kkt.topLeftCorner(n, n) = h;
        rhs.head(n) = -problem.gradient;
        if (me > 0) {
            kkt.block(n, 0, me, n) = problem.eq_matrix;
            kkt.block(0, n, n, me) = problem.eq_matrix.transpose();
            rhs.segment(n, me) = problem.eq_vector;
        }
        for (int k = 0; k < ma; ++k) {
            VecX row;
            double value = 0.0;
            if (active[k].bound) {
                row = VecX::Zero(n);
                row(active[k].row) = 1.0;
                value = active[k].side > 0 ? problem.x_upper(active[k].row)
                                           : problem.x_lower(active[k].row);
            } else {
                row = problem.ineq_matrix.row(active[k].row).transpose();
                value = active[k].side > 0 ? problem.ineq_upper(active[k].row)
                                           : problem.ineq_lower(active[k].row);
            }
            kkt.block(n + me + k, 0, 1, n) = row.transpose();
            kkt.block(0, n + me + k, n, 1) = row;
            rhs(n + me + k) = value;
        }
        // Small dual regularization keeps the saddle system invertible when
        // constraint rows are dependent.
        kkt.bottomRightCorner(me + ma, me + ma).diagonal().array() -= 1e-12;

        Eigen::PartialPivLU<MatX> lu(kkt);
        VecX z = lu.solve(rhs);
        // Iterative refinement recovers tight residuals on stiff systems.
        for (int refine = 0; refine < 3; ++refine) {
            const VecX residual = rhs - kkt * z;
            if (residual.cwiseAbs().maxCoeff() <
                1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff())) break;
            z += lu.solve(residual);
        }

        x = z.head(n);
        eq_mult = z.segment(n, me);
        act_mult = z.tail(ma);
        solved_active = active;

        // Most violated inactive inequality (general rows then bounds). A
        // constraint dropped in the previous iteration needs a clearly
        // positive violation to come back, which blocks degenerate cycling.
        detail::ActiveConstraint candidate{-1, 0, false};
        double worst = options.tolerance;
        auto consider = [&](double value, double lo, double hi, int row, bool bound) {
            for (const auto& a : active) {
                if (a.row == row && a.bound == bound) return;
            }
            const bool tabu = row == last_dropped_row && bound == last_dropped_bound;
            const double threshold = tabu ? 100.0 * options.tolerance : worst;
            if (hi < inf && value - hi > std::max(worst, threshold)) {
                worst = value - hi;
                candidate = {row, +1, bound};
            }
            if (lo > -inf && lo - value > std::max(worst, threshold)) {
                worst = lo - value;
                candidate = {row, -1, bound};
            }
        };
        if (mi > 0) {
            const VecX cx = problem.ineq_matrix * x;
            for (int i = 0; i < mi; ++i) {
                consider(cx(i), problem.ineq_lower(i), problem.ineq_upper(i), i, false);
            }
        }
        for (int i = 0; i < n; ++i) {
            const double lo = has_lower ? problem.x_lower(i) : -inf;
            const double hi = has_upper ? problem.x_upper(i) : inf;
            if (lo > -inf || hi < inf) consider(x(i), lo, hi, i, true);
        }
        if (candidate.row >= 0) {
            active.push_back(candidate);
            last_dropped_row = -1;
            continue;
        }

        // Feasible; drop the most wrong-signed active constraint, if any.
        // The drop threshold sits above the multiplier noise floor of the
        // refined KKT solve.
        int drop = -1;
        const double drop_tol = std::max(
            options.tolerance, 1e-9 * (1.0 + problem.gradient.cwiseAbs().maxCoeff()));
        double most_wrong = drop_tol;
        for (int k = 0; k < ma; ++k) {
            const double m = act_mult(k) * active[k].side;
            if (-m > most_wrong) {
                most_wrong = -m;
                drop = k;
            }
        }
        if (drop >= 0) {
            last_dropped_row = active[drop].row;
            last_dropped_bound = active[drop].bound;
            active.erase(active.begin() + drop);
            continue;
        }

        sol.status = QpStatus::Optimal;
        break;
    }

    sol.x = x;
    sol.eq_multipliers = eq_mult;
    sol.ineq_multipliers = VecX::Zero(mi);
    sol.bound_multipliers = VecX::Zero(n);
    VecX stationarity = problem.hessian * x + problem.gradient;
    if (me > 0) stationarity += problem.eq_matrix.transpose() * eq_mult;
    for (size_t k = 0; k < solved_active.size(); ++k) {
        if (solved_active[k].bound) {
            sol.bound_multipliers(solved_active[k].row) = act_mult(k);
            stationarity(solved_active[k].row) += act_mult(k);
        } else {
            sol.ineq_multipliers(solved_active[k].row) = act_mult(k);
            stationarity +=
                problem.ineq_matrix.row(solved_active[k].row).transpose() * act_mult(k);
        }
    }
    double viol = 0.0;
    if (me > 0) {
        viol = (problem.eq_matrix * x - problem.eq_vector).cwiseAbs().maxCoeff();
    }
    if (mi > 0) {
        const VecX cx = problem.ineq_matrix * x;
        for (int i = 0; i < mi; ++i) {
            viol = std::max(viol, cx(i) - problem.ineq_upper(i));
            viol = std::max(viol, problem.ineq_lower(i) - cx(i));
        }
    }
    for (int i = 0; i < n; ++i) {
        if (has_upper) viol = std::max(viol, x(i) - problem.x_upper(i));
        if (has_lower) viol = std::max(viol, problem.x_lower(i) - x(i));
    }
    sol.max_violation = std::max(viol, 0.0);
    sol.kkt_residual = stationarity.cwiseAbs().maxCoeff();
    const double feas_scale =
        me > 0 ? 1.0 + problem.eq_vector.cwiseAbs().maxCoeff() : 1.0;
    if (sol.max_violation > 1e-6 * feas_scale) {
        sol.status = QpStatus::Infeasible;
    }
    return sol;
}

}  // namespace dyad
