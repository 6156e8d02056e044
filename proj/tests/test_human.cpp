#include <catch2/catch_amalgamated.hpp>

#include <dyad/coupled.hpp>
#include <dyad/coupled_sim.hpp>
#include <dyad/filters.hpp>
#include <dyad/human.hpp>
#include <dyad/integrate.hpp>
#include <dyad/map_estimation.hpp>

#include <random>

using namespace dyad;

TEST_CASE("full human model has the documented joint partition")
{
    const auto human = build_human_model({1.73, 65.0});
    CHECK(human.model.n_dof() == 34);
    int arms = 0, legs = 0, back = 0;
    for (int j = 0; j < human.model.n_joints(); ++j) {
        const auto& name = human.model.joint(j).name;
        if (human.model.joint_dof(j) < 0) continue;
        if (name.find("Shoulder") != std::string::npos ||
            name.find("Elbow") != std::string::npos ||
            name.find("Wrist") != std::string::npos) {
            ++arms;
        } else if (name.find("Hip") != std::string::npos ||
                   name.find("Knee") != std::string::npos ||
                   name.find("Ankle") != std::string::npos ||
                   name.find("Toe") != std::string::npos) {
            ++legs;
        } else if (name.find("L5S1") != std::string::npos ||
                   name.find("T9T8") != std::string::npos) {
            ++back;
        }
    }
    CHECK(arms == 12);
    CHECK(legs == 18);
    CHECK(back == 4);
}

TEST_CASE("total model mass equals the input mass")
{
    for (const auto& [h, m] : {std::pair{1.80, 80.0}, {1.73, 65.0}, {1.55, 48.0}}) {
        const auto full = build_human_model({h, m});
        CHECK(std::abs(full.model.total_mass({}) - m) < 1e-9);
        const auto reduced = build_human_model({h, m}, {.full = false});
        CHECK(std::abs(reduced.model.total_mass({}) - m) < 1e-9);
        CHECK(reduced.model.n_dof() == 14);
    }
}

TEST_CASE("doubling body mass doubles every segment mass")
{
    const auto base = build_human_model({1.75, 60.0});
    const auto heavy = build_human_model({1.75, 120.0});
    for (int i = 0; i < base.model.n_links(); ++i) {
        const double m0 = base.model.link_inertia(i, {}).mass;
        const double m1 = heavy.model.link_inertia(i, {}).mass;
        if (m0 > 0.0) CHECK(m1 == Catch::Approx(2.0 * m0).epsilon(1e-12));
    }
}

TEST_CASE("taller and heavier subject scales up everywhere")
{
    const auto small = build_human_model({1.73, 65.0});
    const auto tall = build_human_model({1.80, 80.0});
    for (int i = 0; i < small.model.n_links(); ++i) {
        const double m0 = small.model.link_inertia(i, {}).mass;
        if (m0 > 0.0) CHECK(tall.model.link_inertia(i, {}).mass > m0);
    }
    for (int j = 0; j < small.model.n_joints(); ++j) {
        const double o0 = small.model.joint(j).origin.translation.norm();
        if (o0 > 1e-9) {
            CHECK(tall.model.joint(j).origin.translation.norm() > o0 - 1e-12);
        }
    }
}

TEST_CASE("model construction is deterministic")
{
    const auto a = build_human_model({1.68, 72.0});
    const auto b = build_human_model({1.68, 72.0});
    for (int i = 0; i < a.model.n_links(); ++i) {
        const auto ia = a.model.link_inertia(i, {});
        const auto ib = b.model.link_inertia(i, {});
        CHECK(ia.mass == ib.mass);
        CHECK((ia.inertia - ib.inertia).norm() == 0.0);
    }
}

TEST_CASE("anthropometry limits are enforced")
{
    CHECK_THROWS_AS(build_human_model({0.8, 65.0}), InvalidParameter);
    CHECK_THROWS_AS(build_human_model({1.73, 300.0}), InvalidParameter);
}

TEST_CASE("standing model is laterally symmetric")
{
    const auto human = build_human_model({1.73, 65.0});
    const SystemState s = standing_state(human);
    const auto com = com_quantities(human.model, s);
    CHECK(std::abs(com.position.y()) < 1e-12);
    // Soles end up on the ground plane.
    KinematicsCache kin(human.model, s, {});
    CHECK(std::abs(kin.frame_kinematics("sole_left").pose.translation.z()) < 1e-9);
}

TEST_CASE("moving average basics")
{
    CHECK_THROWS_AS(moving_average({1.0}, 0), InvalidParameter);
    const auto constant = moving_average({2.0, 2.0, 2.0, 2.0}, 3);
    for (double v : constant) CHECK(v == Catch::Approx(2.0));
    const auto ramp = moving_average({0.0, 2.0, 4.0}, 2);
    CHECK(ramp[0] == Catch::Approx(0.0));
    CHECK(ramp[1] == Catch::Approx(1.0));
    CHECK(ramp[2] == Catch::Approx(3.0));

    MovingAverage stream(2);
    CHECK(stream.push(0.0) == Catch::Approx(0.0));
    CHECK(stream.push(2.0) == Catch::Approx(1.0));
    CHECK(stream.push(4.0) == Catch::Approx(3.0));
}

TEST_CASE("window-20 smoothing cuts white-noise variance about twentyfold")
{
    std::mt19937 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> noise(20000);
    for (auto& v : noise) v = gauss(rng);
    const auto smooth = moving_average(noise, 20);
    double var = 0.0;
    int count = 0;
    for (size_t i = 50; i < smooth.size(); ++i) {
        var += smooth[i] * smooth[i];
        ++count;
    }
    var /= count;
    CHECK(var > 1.0 / 20.0 * 0.7);
    CHECK(var < 1.0 / 20.0 * 1.3);
}

namespace {

struct SyntheticTruth {
    VecX nudot;
    VecX d_true;
    SensorBundle sensors;
};

// Consistent ground-truth dynamic variables and noise-free sensor readings:
// torques and contact wrenches are drawn, the accelerations follow from
// forward dynamics, and internal wrenches from an outward Newton-Euler
// recursion written independently of the estimator.
SyntheticTruth make_truth(const MultibodyModel& model, const SystemState& state,
                          const std::vector<std::string>& contact_frames,
                          std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VecX tau(model.n_dof());
    for (int i = 0; i < model.n_dof(); ++i) tau(i) = 5.0 * u(rng);
    std::vector<ExternalWrench> wrenches;
    for (const auto& f : contact_frames) {
        Vec6 w;
        for (int i = 0; i < 6; ++i) w(i) = 20.0 * u(rng);
        wrenches.push_back({f, w});
    }

    SyntheticTruth out;
    out.nudot = forward_dynamics(model, state, tau, wrenches, {});

    KinematicsCache kin(model, state, {});
    MapLayout layout;
    layout.nv = 6 + model.n_dof();
    layout.n_links = model.n_links();
    layout.n_joints = model.n_joints();
    layout.n_dof = model.n_dof();
    layout.n_contacts = static_cast<int>(contact_frames.size());
    out.d_true = VecX::Zero(layout.size());
    out.d_true.head(layout.nv) = out.nudot;
    out.d_true.segment(layout.torque_offset(), layout.n_dof) = tau;
    for (int k = 0; k < layout.n_contacts; ++k) {
        out.d_true.segment<6>(layout.contact_offset(k)) = wrenches[k].wrench;
    }

    // Link accelerations.
    std::vector<Vec6> link_acc(model.n_links());
    for (int l = 0; l < model.n_links(); ++l) {
        const Vec3 origin = kin.link_transform(l).translation;
        link_acc[l] = kin.point_jacobian(l, origin) * out.nudot +
                      kin.point_bias_acceleration(l, origin);
        out.d_true.segment<6>(layout.link_acc_offset(l)) = link_acc[l];
    }

    // Outward recursion for the internal wrenches: process links so that
    // children come first, accumulating each link's required input wrench.
    const Vec3 g = gravity_vector();
    std::vector<Vec6> w_in(model.n_joints(), Vec6::Zero());
    for (int l = model.n_links() - 1; l >= 1; --l) {
        const SpatialInertia si = model.link_inertia(l, {});
        const Transform& tf = kin.link_transform(l);
        const Vec3 com = tf.apply(si.com);
        const Vec3 r_c = com - tf.translation;
        const Mat3 inertia_c = tf.rotation * si.inertia_about_com() * tf.rotation.transpose();
        const Vec3& w = kin.link_angular_velocity(l);
        const Vec3 a_c = link_acc[l].head<3>() + link_acc[l].tail<3>().cross(r_c) +
                         w.cross(w.cross(r_c));
        Vec3 force = si.mass * (a_c - g);
        Vec3 moment = inertia_c * link_acc[l].tail<3>() + w.cross(inertia_c * w);
        // Child joint wrenches push back on this link.
        for (int j = 0; j < model.n_joints(); ++j) {
            if (model.joint(j).parent_link != l) continue;
            const Vec3 oc = kin.link_transform(model.joint(j).child_link).translation;
            force += w_in[j].head<3>();
            moment += w_in[j].tail<3>() + (oc - com).cross(w_in[j].head<3>());
        }
        // External wrenches on this link.
        for (size_t k = 0; k < contact_frames.size(); ++k) {
            const auto& att = model.frame(contact_frames[k]);
            if (att.link_index != l) continue;
            const Vec3 p = kin.point_world(l, att.offset.translation);
            force -= wrenches[k].wrench.head<3>();
            moment -= wrenches[k].wrench.tail<3>() +
                      (p - com).cross(wrenches[k].wrench.head<3>());
        }
        // Moment about the child origin: m_o = m_c + (c - o) x f.
        const int pj = model.parent_joint_of_link(l);
        w_in[pj].head<3>() = force;
        w_in[pj].tail<3>() = moment + (com - tf.translation).cross(force);
    }
    for (int j = 0; j < model.n_joints(); ++j) {
        out.d_true.segment<6>(layout.wrench_offset(j)) = w_in[j];
    }

    // Sensors: sole FT readings, an IMU on the pelvis and chest, and exact
    // generalized accelerations.
    for (size_t k = 0; k < contact_frames.size(); ++k) {
        SensorBundle::Ft ft;
        ft.id = "ft" + std::to_string(k);
        ft.contact_frame = contact_frames[k];
        ft.value = wrenches[k].wrench;
        out.sensors.fts.push_back(ft);
    }
    SensorBundle::JointAcc ja;
    ja.values = out.nudot;
    ja.variances = VecX::Constant(out.nudot.size(), 1e-6);
    out.sensors.joint_acc = ja;
    return out;
}

}  // namespace

TEST_CASE("noise-free MAP recovers the true dynamic variables")
{
    std::mt19937 rng(101);
    const auto human = build_human_model({1.73, 65.0}, {.full = false});
    SystemState state = standing_state(human);
    state.joint_positions(human.model.joint_dof(human.model.joint_index("jL5S1_roty"))) = 0.3;
    state.joint_velocities.setConstant(0.1);

    const std::vector<std::string> contacts = {"sole_left", "sole_right"};
    const auto truth = make_truth(human.model, state, contacts, rng);
    const auto estimate = map_estimate(human.model, state, contacts, truth.sensors);

    const double rel = (estimate.mean - truth.d_true).norm() / truth.d_true.norm();
    CHECK(rel < 1e-8);

    Eigen::SelfAdjointEigenSolver<MatX> eig(estimate.covariance);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("adding a sensor never increases the posterior covariance")
{
    std::mt19937 rng(103);
    const auto human = build_human_model({1.73, 65.0}, {.full = false});
    SystemState state = standing_state(human);
    const std::vector<std::string> contacts = {"sole_left", "sole_right"};
    auto truth = make_truth(human.model, state, contacts, rng);

    const auto base = map_estimate(human.model, state, contacts, truth.sensors);

    SensorBundle more = truth.sensors;
    SensorBundle::Imu imu;
    imu.id = "pelvis_imu";
    imu.frame = "sole_left";
    imu.value = Vec3::Zero();
    more.imus.push_back(imu);
    const auto with_imu = map_estimate(human.model, state, contacts, more);

    // Loewner comparison on leading 5x5 torque sub-blocks.
    const int off = base.layout.torque_offset();
    const MatX a = base.covariance.block(off, off, 5, 5);
    const MatX b = with_imu.covariance.block(off, off, 5, 5);
    Eigen::SelfAdjointEigenSolver<MatX> eig(a - b);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("doubling all covariances keeps the mean and doubles the covariance")
{
    std::mt19937 rng(105);
    const auto human = build_human_model({1.73, 65.0}, {.full = false});
    SystemState state = standing_state(human);
    const std::vector<std::string> contacts = {"sole_left", "sole_right"};
    auto truth = make_truth(human.model, state, contacts, rng);

    const auto a = map_estimate(human.model, state, contacts, truth.sensors,
                                {.dynamics_variance = 1e-6, .prior_variance = 1e6});
    SensorBundle doubled = truth.sensors;
    for (auto& ft : doubled.fts) ft.covariance *= 2.0;
    for (auto& imu : doubled.imus) imu.covariance *= 2.0;
    if (doubled.joint_acc) doubled.joint_acc->variances *= 2.0;
    const auto b = map_estimate(human.model, state, contacts, doubled,
                                {.dynamics_variance = 2e-6, .prior_variance = 2e6});

    CHECK((a.mean - b.mean).norm() < 1e-9 * std::max(1.0, a.mean.norm()));
    CHECK((2.0 * a.covariance - b.covariance).norm() <
          1e-6 * std::max(1.0, b.covariance.norm()));
}

TEST_CASE("inflating a sensor covariance approaches leaving it out")
{
    std::mt19937 rng(107);
    const auto human = build_human_model({1.73, 65.0}, {.full = false});
    SystemState state = standing_state(human);
    const std::vector<std::string> contacts = {"sole_left", "sole_right"};
    auto truth = make_truth(human.model, state, contacts, rng);

    // Perturb one FT reading so it pulls the estimate when trusted.
    SensorBundle biased = truth.sensors;
    biased.fts[0].value.array() += 5.0;

    SensorBundle without = biased;
    without.fts.erase(without.fts.begin());
    const auto reference = map_estimate(human.model, state, contacts, without);

    SensorBundle inflated = biased;
    inflated.fts[0].covariance *= 1e8;
    const auto approx = map_estimate(human.model, state, contacts, inflated);

    const auto trusted = map_estimate(human.model, state, contacts, biased);
    const double gap_trusted = (trusted.mean - reference.mean).norm();
    const double gap_inflated = (approx.mean - reference.mean).norm();
    CHECK(gap_inflated < 1e-3 * gap_trusted);
}

TEST_CASE("static MAP torques agree with the coupled statics map")
{
    const auto human = build_human_model({1.73, 65.0}, {.full = false});
    CoupledSystem system;
    system.set_human(human.model);
    system.add_env_contact(EntityKind::Human, "sole_left");
    system.add_env_contact(EntityKind::Human, "sole_right");
    CoupledState cstate = CoupledState::zero(system);
    cstate.of(system, EntityKind::Human) = standing_state(human);
    auto& hstate = cstate.of(system, EntityKind::Human);
    hstate.joint_positions(human.model.joint_dof(human.model.joint_index("jL5S1_roty"))) = 0.4;

    const auto statics = static_torques(system, cstate);
    REQUIRE(statics.residual < 1e-8);

    // Constraint forces of the static solution feed the FT channels.
    CoupledSimulator sim(system, cstate);
    const auto acc = sim.acceleration(cstate, statics.torques);
    REQUIRE(acc.nudot.norm() < 1e-6);

    SensorBundle sensors;
    const std::vector<std::string> contacts = {"sole_left", "sole_right"};
    for (int k = 0; k < 2; ++k) {
        SensorBundle::Ft ft;
        ft.id = "shoe" + std::to_string(k);
        ft.contact_frame = contacts[k];
        ft.value = acc.constraint_forces.segment<6>(6 * k);
        sensors.fts.push_back(ft);
    }
    SensorBundle::JointAcc ja;
    ja.values = VecX::Zero(6 + human.model.n_dof());
    ja.variances = VecX::Constant(6 + human.model.n_dof(), 1e-8);
    sensors.joint_acc = ja;

    const auto estimate = map_estimate(human.model,
                                       cstate.of(system, EntityKind::Human),
                                       contacts, sensors);
    const VecX tau_map = estimate.joint_torques();
    const VecX tau_static = statics.of(system, EntityKind::Human);
    CHECK((tau_map - tau_static).norm() < 1e-6 * std::max(1.0, tau_static.norm()));

    // The lumbosacral extraction agrees between the two routes.
    const VecX l5s1_map = l5s1_torque(human.model, estimate);
    const VecX l5s1_static = l5s1_torque_from_joint_torques(human.model, tau_static);
    CHECK((l5s1_map - l5s1_static).norm() < 1e-6);
}

TEST_CASE("bending forward increases the lumbosacral torque")
{
    const auto human = build_human_model({1.73, 65.0}, {.full = false});
    CoupledSystem system;
    system.set_human(human.model);
    system.add_env_contact(EntityKind::Human, "sole_left");
    system.add_env_contact(EntityKind::Human, "sole_right");

    const int bend_dof = human.model.joint_dof(human.model.joint_index("jL5S1_roty"));
    auto torque_at = [&](double bend) {
        CoupledState cstate = CoupledState::zero(system);
        cstate.of(system, EntityKind::Human) = standing_state(human);
        cstate.of(system, EntityKind::Human).joint_positions(bend_dof) = bend;
        const auto statics = static_torques(system, cstate);
        return l5s1_magnitude(human.model,
                              statics.of(system, EntityKind::Human));
    };

    const double upright = torque_at(0.0);
    const double bent = torque_at(std::numbers::pi / 4.0);
    CHECK(upright < 10.0);  // upper-body CoM nearly above the joint
    CHECK(bent > upright + 1.0);
}

TEST_CASE("l5s1 lookup fails on models without the joint")
{
    MultibodyModel m;
    m.add_base_link("base", std::nullopt);
    VecX tau(0);
    CHECK_THROWS_AS(l5s1_torque_from_joint_torques(m, tau), LookupError);
}
