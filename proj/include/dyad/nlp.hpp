#pragma once

// Smooth constrained minimization: SQP with damped-BFGS curvature, elastic
// equality constraints and an l1-merit line search, built on solve_qp.
// Gradients default to central finite differences.

#include "dyad/qp.hpp"

#include <functional>
#include <vector>

namespace dyad {

struct NlpProblem {
    std::function<double(const VecX&)> objective;
    /// Equality constraints c(x) = 0; empty function means unconstrained.
    std::function<VecX(const VecX&)> equality;
    VecX x_lower;  ///< optional box (empty: unbounded)
    VecX x_upper;
    VecX x0;
};

struct NlpOptions {
    int max_iterations{200};
    double tolerance{1e-8};            ///< stationarity, scaled
    double constraint_tolerance{1e-8};
    double fd_step{1e-6};
    double initial_trust{1.0};         ///< per-step cap on |d|_inf
    bool log_iterations{true};
};

enum class NlpStatus { Optimal, MaxIterations, LineSearchFailure };

struct NlpIterate {
    int iteration;
    double objective;
    double constraint_violation;
    double merit;
    double step_norm;
    double stationarity;
};

struct NlpSolution {
    VecX x;
    double objective{0.0};
    double constraint_violation{0.0};
    double stationarity{0.0};
    NlpStatus status{NlpStatus::MaxIterations};
    int iterations{0};
    std::vector<NlpIterate> log;
};

namespace detail {

inline VecX fd_gradient(const std::function<double(const VecX&)>& f, const VecX& x,
                        double step)
{
    VecX g(x.size());
    VecX xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x(i)));
        const double xi = x(i);
        xp(i) = xi + h;
        const double fp = f(xp);
        xp(i) = xi - h;
        const double fm = f(xp);
        xp(i) = xi;
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline MatX fd_jacobian(const std::function<VecX(const VecX&)>& f, const VecX& x,
                        int m, double step)
{
    MatX jac(m, x.size());
    VecX xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x(i)));
        const double xi = x(i);
        xp(i) = xi + h;
        const VecX fp = f(xp);
        xp(i) = xi - h;
        const VecX fm = f(xp);
        xp(i) = xi;
        jac.col(i) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

}  // namespace detail

inline NlpSolution solve_nlp(const NlpProblem& problem, const NlpOptions& options = {})
{
    if (!problem.objective) throw InvalidParameter("nlp objective is required");
    const int n = static_cast<int>(problem.x0.size());
    if (n == 0) throw InvalidParameter("nlp initial point is required");
    const bool boxed = problem.x_lower.size() == n && problem.x_upper.size() == n;

    VecX x = problem.x0;
    if (boxed) x = x.cwiseMax(problem.x_lower).cwiseMin(problem.x_upper);

    auto eval_c = [&](const VecX& xx) -> VecX {
        return problem.equality ? problem.equality(xx) : VecX();
    };
    VecX c = eval_c(x);
    const int m = static_cast<int>(c.size());

    double f = problem.objective(x);
    VecX grad = detail::fd_gradient(problem.objective, x, options.fd_step);
    MatX jac = m > 0 ? detail::fd_jacobian(problem.equality, x, m, options.fd_step)
                     : MatX(0, n);

    MatX bfgs = MatX::Identity(n, n) * std::max(1.0, grad.norm());
    VecX lambda = VecX::Zero(m);
    double mu = 1.0;  // l1 merit penalty, raised with multiplier estimates

    NlpSolution sol;
    sol.log.reserve(options.max_iterations);

    auto merit = [&](double fv, const VecX& cv) {
        return fv + mu * (cv.size() > 0 ? cv.cwiseAbs().sum() : 0.0);
    };
    auto stationarity_of = [&](const VecX& g, const MatX& j, const VecX& lam,
                               const VecX& xx) {
        VecX st = g;
        if (m > 0) st += j.transpose() * lam;
        if (boxed) {
            // Project out components pushing into an active bound.
            for (int i = 0; i < n; ++i) {
                if (xx(i) <= problem.x_lower(i) + 1e-12 && st(i) > 0.0) st(i) = 0.0;
                if (xx(i) >= problem.x_upper(i) - 1e-12 && st(i) < 0.0) st(i) = 0.0;
            }
        }
        return st.cwiseAbs().maxCoeff() / std::max(1.0, std::abs(f));
    };

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        sol.iterations = iter + 1;

        // Step bounds: trust region intersected with the variable box.
        const double trust = options.initial_trust;
        VecX d_lower = VecX::Constant(n, -trust);
        VecX d_upper = VecX::Constant(n, trust);
        if (boxed) {
            d_lower = d_lower.cwiseMax(problem.x_lower - x);
            d_upper = d_upper.cwiseMin(problem.x_upper - x);
        }

        // SQP subproblem with hard linearized constraints.
        QpProblem qp;
        qp.hessian = bfgs;
        qp.gradient = grad;
        if (m > 0) {
            qp.eq_matrix = jac;
            qp.eq_vector = -c;
        }
        qp.x_lower = d_lower;
        qp.x_upper = d_upper;
        QpSolution step = solve_qp(qp);

        bool restoration = false;
        if (step.status != QpStatus::Optimal && m > 0) {
            // Restoration step: reduce the linearized violation inside the
            // box when the constrained subproblem cannot be met.
            QpProblem rest;
            rest.hessian = jac.transpose() * jac;
            rest.hessian.diagonal().array() += 1e-8;
            rest.gradient = jac.transpose() * c;
            rest.x_lower = d_lower;
            rest.x_upper = d_upper;
            step = solve_qp(rest);
            restoration = true;
        }
        const VecX d = step.x.head(n);
        if (!restoration && m > 0 && step.eq_multipliers.size() == m) {
            lambda = step.eq_multipliers;
        }

        mu = std::max(mu, (m > 0 ? lambda.cwiseAbs().maxCoeff() : 0.0) * 2.0 + 1.0);

        const double viol0 = m > 0 ? c.cwiseAbs().sum() : 0.0;
        const double phi0 = merit(f, c);
        const double directional =
            grad.dot(d) - mu * viol0;  // upper bound on the merit derivative

        const double st = stationarity_of(grad, jac, lambda, x);
        if (options.log_iterations) {
            sol.log.push_back({iter, f, m > 0 ? c.cwiseAbs().maxCoeff() : 0.0, phi0,
                               d.norm(), st});
        }
        if (st <= options.tolerance &&
            (m == 0 || c.cwiseAbs().maxCoeff() <= options.constraint_tolerance)) {
            sol.status = NlpStatus::Optimal;
            break;
        }
        if (d.norm() < 1e-14) {
            sol.status = (m == 0 || c.cwiseAbs().maxCoeff() <= options.constraint_tolerance)
                             ? NlpStatus::Optimal
                             : NlpStatus::LineSearchFailure;
            break;
        }

        // Backtracking Armijo line search on the l1 merit.
        double alpha = 1.0;
        double f_new = f;
        VecX c_new = c;
        VecX x_new = x;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = x + alpha * d;
            if (boxed) x_new = x_new.cwiseMax(problem.x_lower).cwiseMin(problem.x_upper);
            f_new = problem.objective(x_new);
            c_new = eval_c(x_new);
            if (merit(f_new, c_new) <= phi0 + 1e-4 * alpha * std::min(directional, 0.0)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            sol.status = NlpStatus::LineSearchFailure;
            break;
        }

        const VecX grad_new = detail::fd_gradient(problem.objective, x_new, options.fd_step);
        const MatX jac_new =
            m > 0 ? detail::fd_jacobian(problem.equality, x_new, m, options.fd_step)
                  : MatX(0, n);

        // Damped BFGS on the Lagrangian gradient difference.
        const VecX s = x_new - x;
        VecX y = grad_new - grad;
        if (m > 0) y += (jac_new - jac).transpose() * lambda;
        const double sy = s.dot(y);
        const VecX bs = bfgs * s;
        const double sbs = s.dot(bs);
        if (sbs > 1e-16) {
            double theta = 1.0;
            if (sy < 0.2 * sbs) theta = 0.8 * sbs / (sbs - sy);
            const VecX r = theta * y + (1.0 - theta) * bs;
            bfgs += r * r.transpose() / s.dot(r) - bs * bs.transpose() / sbs;
        }

        x = x_new;
        f = f_new;
        c = c_new;
        grad = grad_new;
        jac = jac_new;
    }

    sol.x = x;
    sol.objective = f;
    sol.constraint_violation = m > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
    sol.stationarity = stationarity_of(grad, jac, lambda, x);
    return sol;
}

}  // namespace dyad
