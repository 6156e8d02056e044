#include <catch2/catch_amalgamated.hpp>

#include <dyad/codesign.hpp>

#include "toy_models.hpp"

using namespace dyad;

namespace {

// Single-variable lifter: a welded pivot, one revolute joint about y, an
// upward arm whose length is the only design variable, and a point load
// fixed at the arm tip. The tip must sit at the task height; torque and CoM
// terms trade off to give an interior optimal length.
struct ToyLifter {
    static constexpr double pivot_height = 0.5;
    static constexpr double arm_length0 = 0.6;
    static constexpr double arm_radius = 0.03;
    static constexpr double arm_mass0 = 1.5;  // at multiplier 1
    static constexpr double load_mass = 2.0;
    static constexpr double box_mass = 1.0;

    CodesignProblem problem;

    explicit ToyLifter(double task_height = 0.85, double w1 = 0.05, double w3 = 10.0)
    {
        MultibodyModel m;
        ParametrizedLink pivot;
        pivot.shape = ShapeGeom::box(0.1, 0.1, 0.1);
        pivot.density = box_mass / 1e-3;
        m.add_base_link("pivot", pivot);
        m.add_frame("anchor", 0, Transform::identity());

        JointDescriptor hinge;
        hinge.name = "hinge";
        hinge.parent_link = 0;
        hinge.axis = Vec3::UnitY();
        hinge.position_min = -1.5;
        hinge.position_max = 1.5;
        ParametrizedLink arm;
        arm.shape = ShapeGeom::cylinder(arm_radius, arm_length0);
        arm.density = arm_mass0 /
                      (std::numbers::pi * arm_radius * arm_radius * arm_length0);
        arm.frame.translation = Vec3(0.0, 0.0, 0.5 * arm_length0);
        const int arm_link = m.add_link("arm", arm, hinge);

        JointDescriptor mount;
        mount.name = "mount";
        mount.kind = JointKind::Fixed;
        mount.parent_link = arm_link;
        mount.origin.translation = Vec3(0.0, 0.0, arm_length0);
        ParametrizedLink load;
        load.shape = ShapeGeom::sphere(0.04);
        load.density = load_mass / (4.0 / 3.0 * std::numbers::pi * std::pow(0.04, 3));
        const int load_link = m.add_link("load", load, mount);
        m.add_frame("tip", load_link, Transform::identity());

        CoupledSystem system;
        system.set_robot(m);
        system.add_env_contact(EntityKind::Robot, "anchor");

        problem.system = std::move(system);
        problem.heights = {task_height};
        problem.w1 = w1;
        problem.w2 = 0.0;
        problem.w3 = w3;
        problem.design_links = {m.link_index("arm")};
        problem.pi_lower = VecX::Constant(1, 0.5);
        problem.pi_upper = VecX::Constant(1, 2.0);
        FrameTarget tip;
        tip.entity = EntityKind::Robot;
        tip.frame = "tip";
        tip.kind = FrameTarget::Kind::Height;
        problem.extra_targets.push_back(tip);
    }

    CoupledState initial_state() const
    {
        CoupledState state = CoupledState::zero(problem.system);
        state.states[0].base_position = Vec3(0.0, 0.0, pivot_height);
        state.states[0].joint_positions(0) = 0.3;
        return state;
    }

    // Closed-form cost over the grid; infeasible lengths get +inf.
    double oracle_cost(double lm, double task_height) const
    {
        const double length = lm * arm_length0;
        const double rise = task_height - pivot_height;
        if (length < rise) return std::numeric_limits<double>::infinity();
        const double cos_theta = rise / length;
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
        const double arm_mass = arm_mass0 * lm;
        const double torque =
            kGravity * sin_theta * (arm_mass * 0.5 * length + load_mass * length);
        const double com_z = (arm_mass * 0.5 * length + load_mass * length) /
                             (box_mass + arm_mass + load_mass);
        return problem.w1 * torque * torque + problem.w3 / (com_z * com_z);
    }
};

}  // namespace

TEST_CASE("toy lifter matches the brute-force grid search")
{
    ToyLifter toy;
    // Grid oracle at millimeter-level multiplier resolution.
    double best_lm = 0.0;
    double best_cost = std::numeric_limits<double>::infinity();
    const double resolution = 1e-3;
    for (double lm = 0.5; lm <= 2.0 + 1e-12; lm += resolution) {
        const double cost = toy.oracle_cost(lm, toy.problem.heights[0]);
        if (cost < best_cost) {
            best_cost = cost;
            best_lm = lm;
        }
    }
    REQUIRE(best_lm > 0.55);  // interior optimum
    REQUIRE(best_lm < 1.95);

    NlpOptions options;
    options.tolerance = 1e-6;
    options.max_iterations = 300;
    const auto result = solve_codesign(toy.problem, {toy.initial_state()}, options);
    INFO("status " << static_cast<int>(result.status) << " pi "
                   << result.pi_star(0) << " grid " << best_lm);
    CHECK(result.status == NlpStatus::Optimal);
    CHECK(result.constraint_residual < 1e-6);
    CHECK(result.stationarity <= 1e-6);
    CHECK(std::abs(result.pi_star(0) - best_lm) <= resolution);

    // Merit is monotone over accepted iterates.
    for (size_t i = 1; i < result.log.size(); ++i) {
        CHECK(result.log[i].merit <= result.log[i - 1].merit + 1e-9);
    }
}

TEST_CASE("weight rescaling leaves the optimal design unchanged")
{
    ToyLifter toy;
    NlpOptions options;
    options.tolerance = 1e-6;
    options.max_iterations = 300;
    const auto a = solve_codesign(toy.problem, {toy.initial_state()}, options);

    ToyLifter scaled;
    scaled.problem.w1 *= 7.0;
    scaled.problem.w3 *= 7.0;
    const auto b = solve_codesign(scaled.problem, {scaled.initial_state()}, options);
    REQUIRE(a.status == NlpStatus::Optimal);
    REQUIRE(b.status == NlpStatus::Optimal);
    CHECK(std::abs(a.pi_star(0) - b.pi_star(0)) < 1e-4);
}

TEST_CASE("pure CoM objective drives the length to its upper bound")
{
    ToyLifter toy(0.85, 0.0, 1.0);
    NlpOptions options;
    options.max_iterations = 200;
    options.tolerance = 1e-6;
    const auto result = solve_codesign(toy.problem, {toy.initial_state()}, options);
    CHECK(result.pi_star(0) == Catch::Approx(2.0).margin(1e-4));
}

TEST_CASE("cost terms follow their definitions")
{
    // T3 follows the inverse square of the null-configuration CoM height.
    auto box_robot = [](double height) {
        MultibodyModel m;
        ParametrizedLink body;
        body.shape = ShapeGeom::box(0.1, 0.1, height);
        body.density = 500.0;
        body.frame.translation = Vec3(0.0, 0.0, 0.5 * height);
        m.add_base_link("body", body);
        m.add_frame("ground", 0, Transform::identity());
        CoupledSystem system;
        system.set_robot(m);
        system.add_env_contact(EntityKind::Robot, "ground");
        return system;
    };
    const auto short_sys = box_robot(0.2);
    const auto tall_sys = box_robot(0.4);
    const auto costs_short = evaluate_costs(short_sys, {CoupledState::zero(short_sys)},
                                            DesignParams::identity(1));
    const auto costs_tall = evaluate_costs(tall_sys, {CoupledState::zero(tall_sys)},
                                           DesignParams::identity(1));
    CHECK(costs_short[2] == Catch::Approx(4.0 * costs_tall[2]).epsilon(1e-9));

    // T1 on a single-joint lifter equals the analytic squared statics.
    ToyLifter toy;
    CoupledState state = toy.initial_state();
    const double theta = state.states[0].joint_positions(0);
    const auto costs = evaluate_costs(toy.problem.system, {state},
                                      DesignParams::identity(
                                          toy.problem.system.entity(EntityKind::Robot)
                                              .model.n_links()));
    const double torque = kGravity * std::sin(theta) *
                          (ToyLifter::arm_mass0 * 0.5 * ToyLifter::arm_length0 +
                           ToyLifter::load_mass * ToyLifter::arm_length0);
    CHECK(costs[0] == Catch::Approx(torque * torque).epsilon(1e-8));
}

TEST_CASE("short-range design cannot reach the tall task")
{
    // Design A optimized for a low height hugs the torque optimum and stays
    // short; design B must serve the tall height as well. Only B reaches it.
    ToyLifter low(0.62, 1.0, 0.01);
    NlpOptions options;
    options.max_iterations = 200;
    options.tolerance = 1e-6;
    const auto design_a = solve_codesign(low.problem, {low.initial_state()}, options);
    REQUIRE(design_a.status == NlpStatus::Optimal);

    ToyLifter tall(0.62, 1.0, 0.01);
    tall.problem.heights = {0.62, 1.05};
    const auto design_b = solve_codesign(
        tall.problem, {tall.initial_state(), tall.initial_state()}, options);
    REQUIRE(design_b.status == NlpStatus::Optimal);
    CHECK(design_b.pi_star(0) > design_a.pi_star(0));

    // Feasibility probe at the tall height for both frozen designs.
    auto reaches = [&](const VecX& pi, double height) {
        ToyLifter probe(height, 1.0, 0.01);
        probe.problem.design_links.clear();
        probe.problem.pi_lower = VecX();
        probe.problem.pi_upper = VecX();
        probe.problem.system.set_robot_params(detail::robot_params_with(
            low.problem.system, low.problem.design_links, pi));
        CoupledState state = probe.initial_state();
        std::vector<Transform> anchors;
        KinematicsCache kin(probe.problem.system.entity(EntityKind::Robot).model,
                            state.states[0],
                            probe.problem.system.entity(EntityKind::Robot).params);
        anchors.push_back(kin.frame_kinematics("anchor").pose);
        return ik_warm_start(probe.problem,
                             anchors,
                             probe.problem.system.entity(EntityKind::Robot).params, 0,
                             state);
    };
    CHECK(reaches(design_b.pi_star, 1.05));
    CHECK(!reaches(design_a.pi_star, 1.05));
}

TEST_CASE("identical designs give identical comparison columns")
{
    ToyLifter toy;
    const VecX pi = VecX::Constant(1, 1.2);
    NlpOptions options;
    options.max_iterations = 150;
    options.tolerance = 1e-6;
    const auto cmp = compare_designs(toy.problem, {toy.initial_state()}, pi, pi, options);
    REQUIRE(cmp.design_a.feasible[0]);
    REQUIRE(cmp.design_b.feasible[0]);
    CHECK(cmp.design_a.robot_torque_norm(0) ==
          Catch::Approx(cmp.design_b.robot_torque_norm(0)).margin(1e-9));
}

TEST_CASE("sweep degenerate cases")
{
    const auto human = build_human_model({1.73, 65.0}, {.full = false});

    SweepOptions options;
    options.load_mass = 3.0;
    options.solver.max_iterations = 60;
    options.solver.tolerance = 1e-4;

    // Single model, single height: the cell normalizes to one.
    const auto single = ergonomics_sweep({human}, 1.0, 1.0, 0.5, options);
    REQUIRE(single.heights.size() == 1);
    CHECK(single.mean(0) == Catch::Approx(1.0));
    CHECK(single.stddev(0) == Catch::Approx(0.0).margin(1e-12));

    // Two identical models: zero spread at every height.
    const auto twins = ergonomics_sweep({human, human}, 0.9, 1.1, 0.2, options);
    for (Eigen::Index h = 0; h < twins.stddev.size(); ++h) {
        if (!std::isnan(twins.stddev(h))) {
            CHECK(twins.stddev(h) < 1e-6);
        }
    }
    // All normalized values in (0, 1].
    for (int m = 0; m < twins.torque.rows(); ++m) {
        for (int h = 0; h < twins.torque.cols(); ++h) {
            if (std::isnan(twins.torque(m, h))) continue;
            const double v = twins.torque(m, h) / twins.max_torque;
            CHECK(v > 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}
