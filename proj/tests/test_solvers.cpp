#include <catch2/catch_amalgamated.hpp>

#include <dyad/nlp.hpp>
#include <dyad/qp.hpp>

#include "oracles.hpp"

#include <random>

using namespace dyad;

TEST_CASE("unconstrained QP returns the target point")
{
    const int n = 4;
    VecX target(n);
    target << 1.0, -2.0, 0.5, 3.0;
    QpProblem p = QpProblem::unconstrained(MatX::Identity(n, n), -target);
    const auto sol = solve_qp(p);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK((sol.x - target).norm() < 1e-7);
}

TEST_CASE("equality-constrained QP matches the dense KKT solve")
{
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 6);
        const int m = 1 + static_cast<int>(rng() % (n - 1));
        MatX root(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) root(i, j) = gauss(rng);
        QpProblem p;
        p.hessian = root * root.transpose() + 0.5 * MatX::Identity(n, n);
        p.gradient = VecX::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
        p.eq_matrix = MatX::NullaryExpr(m, n, [&](Eigen::Index, Eigen::Index) {
            return gauss(rng);
        });
        p.eq_vector = VecX::NullaryExpr(m, [&](Eigen::Index) { return gauss(rng); });
        const auto sol = solve_qp(p);
        REQUIRE(sol.status == QpStatus::Optimal);
        const VecX oracle = oracles::dense_kkt_solve(p.hessian, p.gradient,
                                                     p.eq_matrix, p.eq_vector);
        CHECK((sol.x - oracle).norm() < 1e-8 * std::max(1.0, oracle.norm()));
        CHECK(sol.kkt_residual < 1e-8);
    }
}

TEST_CASE("clamped 1D box minimum")
{
    QpProblem p;
    p.hessian = MatX::Identity(1, 1) * 2.0;
    p.gradient = VecX::Constant(1, -4.0);  // min (x-2)^2
    p.x_lower = VecX::Constant(1, 0.0);
    p.x_upper = VecX::Constant(1, 1.0);
    const auto sol = solve_qp(p);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.x(0) == Catch::Approx(1.0));
    CHECK(sol.bound_multipliers(0) > 0.0);
}

TEST_CASE("box-constrained QPs match projection on a diagonal Hessian")
{
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        QpProblem p;
        p.hessian = MatX::Identity(n, n);
        VecX target(n);
        for (int i = 0; i < n; ++i) target(i) = u(rng);
        p.gradient = -target;
        p.x_lower = VecX::Constant(n, -1.0);
        p.x_upper = VecX::Constant(n, 1.0);
        const auto sol = solve_qp(p);
        REQUIRE(sol.status == QpStatus::Optimal);
        const VecX expected = target.cwiseMax(-1.0).cwiseMin(1.0);
        CHECK((sol.x - expected).norm() < 1e-7);
    }
}

TEST_CASE("general inequalities activate correctly")
{
    // min |x - (2, 2)|^2 s.t. x1 + x2 <= 2.
    QpProblem p;
    p.hessian = 2.0 * MatX::Identity(2, 2);
    p.gradient = VecX(2);
    p.gradient << -4.0, -4.0;
    p.ineq_matrix = MatX::Ones(1, 2);
    p.ineq_lower = VecX::Constant(1, -std::numeric_limits<double>::infinity());
    p.ineq_upper = VecX::Constant(1, 2.0);
    const auto sol = solve_qp(p);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.x(0) == Catch::Approx(1.0));
    CHECK(sol.x(1) == Catch::Approx(1.0));
    CHECK(sol.ineq_multipliers(0) > 0.0);
}

TEST_CASE("inconsistent equalities report infeasible")
{
    QpProblem p;
    p.hessian = MatX::Identity(1, 1);
    p.gradient = VecX::Zero(1);
    p.eq_matrix = MatX::Ones(2, 1);
    p.eq_vector = VecX(2);
    p.eq_vector << 0.0, 1.0;
    const auto sol = solve_qp(p);
    CHECK(sol.status == QpStatus::Infeasible);
}

TEST_CASE("identical problems give identical iterates")
{
    QpProblem p;
    p.hessian = MatX::Identity(3, 3);
    p.gradient = VecX::Constant(3, -1.0);
    p.x_lower = VecX::Constant(3, -0.5);
    p.x_upper = VecX::Constant(3, 0.5);
    const auto a = solve_qp(p);
    const auto b = solve_qp(p);
    CHECK(a.iterations == b.iterations);
    CHECK((a.x - b.x).norm() == 0.0);
}

TEST_CASE("NLP matches QP on a convex quadratic with linear constraints")
{
    MatX h(3, 3);
    h << 4.0, 1.0, 0.0,
         1.0, 3.0, 0.5,
         0.0, 0.5, 2.0;
    VecX g(3);
    g << -1.0, 2.0, -0.5;
    MatX a(1, 3);
    a << 1.0, 1.0, 1.0;
    VecX b(1);
    b << 1.0;

    QpProblem qp;
    qp.hessian = h;
    qp.gradient = g;
    qp.eq_matrix = a;
    qp.eq_vector = b;
    const auto qp_sol = solve_qp(qp);
    REQUIRE(qp_sol.status == QpStatus::Optimal);

    NlpProblem nlp;
    nlp.objective = [&](const VecX& x) { return 0.5 * x.dot(h * x) + g.dot(x); };
    nlp.equality = [&](const VecX& x) { return VecX((a * x - b)); };
    nlp.x0 = VecX::Zero(3);
    const auto nlp_sol = solve_nlp(nlp);
    CHECK(nlp_sol.status == NlpStatus::Optimal);
    CHECK((nlp_sol.x - qp_sol.x).norm() < 1e-6);
}

TEST_CASE("Rosenbrock converges from the classic start")
{
    NlpProblem nlp;
    nlp.objective = [](const VecX& x) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        return a * a + 100.0 * b * b;
    };
    nlp.x0 = VecX(2);
    nlp.x0 << -1.2, 1.0;
    NlpOptions opts;
    opts.max_iterations = 500;
    const auto sol = solve_nlp(nlp, opts);
    CHECK(sol.status == NlpStatus::Optimal);
    CHECK(std::abs(sol.x(0) - 1.0) < 1e-5);
    CHECK(std::abs(sol.x(1) - 1.0) < 1e-5);
}

TEST_CASE("constant objective stops immediately")
{
    NlpProblem nlp;
    nlp.objective = [](const VecX&) { return 3.5; };
    nlp.x0 = VecX::Constant(2, 0.7);
    const auto sol = solve_nlp(nlp);
    CHECK(sol.status == NlpStatus::Optimal);
    CHECK((sol.x - nlp.x0).norm() < 1e-12);
    CHECK(sol.iterations <= 2);
}

TEST_CASE("merit is monotone within the iterate log")
{
    NlpProblem nlp;
    nlp.objective = [](const VecX& x) {
        return std::pow(x(0) - 2.0, 4) + std::pow(x(1) + 1.0, 2) + 0.3 * x(0) * x(1);
    };
    nlp.x0 = VecX::Zero(2);
    const auto sol = solve_nlp(nlp);
    REQUIRE(sol.log.size() > 2);
    for (size_t i = 1; i < sol.log.size(); ++i) {
        CHECK(sol.log[i].merit <= sol.log[i - 1].merit + 1e-12);
    }
}

TEST_CASE("nonlinear equality constraint is satisfied")
{
    // min x^2 + y^2 s.t. x * y = 1; optima at (1,1) and (-1,-1).
    NlpProblem nlp;
    nlp.objective = [](const VecX& x) { return x.squaredNorm(); };
    nlp.equality = [](const VecX& x) {
        VecX c(1);
        c << x(0) * x(1) - 1.0;
        return c;
    };
    nlp.x0 = VecX(2);
    nlp.x0 << 2.0, 0.3;
    const auto sol = solve_nlp(nlp);
    CHECK(sol.status == NlpStatus::Optimal);
    CHECK(sol.constraint_violation < 1e-8);
    CHECK(std::abs(sol.x(0) * sol.x(1) - 1.0) < 1e-8);
    CHECK(sol.objective == Catch::Approx(2.0).epsilon(1e-5));
}
