#pragma once

// Morphology optimization: finds link-length multipliers that minimize the
// agents' static joint torques across a set of load heights while raising
// the robot CoM, with postures co-optimized under kinematic task
// constraints. Also provides the ergonomics height sweep and design
// comparison reports built on the same statics.

#include "dyad/coupled.hpp"
#include "dyad/human.hpp"
#include "dyad/map_estimation.hpp"
#include "dyad/nlp.hpp"

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

namespace dyad {

struct FrameTarget {
    EntityKind entity{EntityKind::Robot};
    std::string frame;
    enum class Kind { FullPose, Position, Height } kind{Kind::FullPose};
    Transform target{};  ///< kind Height only uses target.translation.z()
};

struct CodesignProblem {
    CoupledSystem system;
    std::vector<double> heights;          ///< load heights, strictly increasing
    Transform object_pose{};              ///< per-height pose; z is replaced
    std::vector<FrameTarget> extra_targets;  ///< applied at every height
    double w1{1e5};    ///< robot torque weight
    double w2{1e10};   ///< human torque weight
    double w3{1.0};    ///< CoM-raising weight
    std::vector<int> design_links;        ///< robot links with free multipliers
    VecX pi_lower;
    VecX pi_upper;
    double base_position_range{2.0};
    double base_rotation_range{1.2};

    void validate() const
    {
        system.validate();
        if (heights.empty()) throw InvalidParameter("codesign needs at least one height");
        for (size_t i = 1; i < heights.size(); ++i) {
            if (heights[i] <= heights[i - 1]) {
                throw InvalidParameter("heights must be strictly increasing");
            }
        }
        if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0) {
            throw InvalidParameter("weights must be non-negative");
        }
        if (!design_links.empty()) {
            if (pi_lower.size() != static_cast<Eigen::Index>(design_links.size()) ||
                pi_upper.size() != static_cast<Eigen::Index>(design_links.size())) {
                throw InvalidParameter("design bounds must match design links");
            }
            if ((pi_upper - pi_lower).minCoeff() <= 0.0) {
                throw InvalidParameter("design bounds must be non-empty");
            }
        }
    }
};

struct CodesignResult {
    VecX pi_star;
    std::vector<CoupledState> configurations;  ///< per height
    double t1{0.0};
    double t2{0.0};
    double t3{0.0};
    double objective{0.0};
    double constraint_residual{0.0};
    double stationarity{0.0};
    NlpStatus status{NlpStatus::MaxIterations};
    int iterations{0};
    std::vector<NlpIterate> log;
};

namespace detail {

/// Applies selected multipliers onto the robot design parameters.
inline DesignParams robot_params_with(const CoupledSystem& system,
                                      const std::vector<int>& links, const VecX& pi)
{
    const auto& robot = system.entity(EntityKind::Robot);
    DesignParams params = robot.params;
    if (params.empty()) {
        params = DesignParams::identity(robot.model.n_links());
    }
    for (size_t k = 0; k < links.size(); ++k) {
        params.length_multipliers(links[k]) = pi(k);
    }
    return params;
}

/// Robot CoM height at the null joint configuration, grounded so the lowest
/// environment-contact frame touches z = 0.
inline double null_config_com_height(const CoupledSystem& system, const DesignParams& params)
{
    const auto& robot = system.entity(EntityKind::Robot);
    SystemState state = SystemState::zero(robot.model);
    KinematicsCache kin(robot.model, state, params);
    double lowest = 0.0;
    bool any = false;
    for (const auto& c : system.env_contacts()) {
        if (c.agent != EntityKind::Robot) continue;
        lowest = std::min(lowest, kin.frame_kinematics(c.frame).pose.translation.z());
        any = true;
    }
    const auto com = com_quantities(robot.model, state, params);
    return any ? com.position.z() - lowest : com.position.z();
}

struct VariableLayout {
    struct EntityVars {
        EntityKind kind;
        int offset;  ///< within one height block
        int n_dof;
    };
    std::vector<EntityVars> entities;  ///< robot/human only
    int per_height{0};
    int n_heights{0};
    int pi_offset{0};
    int n_pi{0};

    int size() const { return per_height * n_heights + n_pi; }

    static VariableLayout of(const CodesignProblem& problem)
    {
        VariableLayout l;
        for (const auto& e : problem.system.entities()) {
            if (e.kind == EntityKind::Object) continue;
            l.entities.push_back({e.kind, l.per_height, e.model.n_dof()});
            l.per_height += 6 + e.model.n_dof();
        }
        l.n_heights = static_cast<int>(problem.heights.size());
        l.pi_offset = l.per_height * l.n_heights;
        l.n_pi = static_cast<int>(problem.design_links.size());
        return l;
    }
};

/// Decodes one height block into a coupled state (object pose fixed).
inline CoupledState decode_state(const CodesignProblem& problem, const VariableLayout& l,
                                 const VecX& x, int height_index,
                                 const CoupledState& reference)
{
    CoupledState state = reference;
    const int base = l.per_height * height_index;
    for (const auto& ev : l.entities) {
        const int i = problem.system.index_of(ev.kind);
        auto& s = state.states[i];
        const auto seg = x.segment(base + ev.offset, 6 + ev.n_dof);
        s.base_position = seg.template head<3>();
        s.base_orientation = exp_so3(seg.template segment<3>(3));
        s.joint_positions = seg.tail(ev.n_dof);
        s.base_velocity.setZero();
        s.joint_velocities.setZero();
    }
    if (problem.system.has(EntityKind::Object)) {
        auto& obj = state.states[problem.system.index_of(EntityKind::Object)];
        Transform pose = problem.object_pose;
        pose.translation.z() = problem.heights[height_index];
        obj.base_position = pose.translation;
        obj.base_orientation = pose.rotation;
        obj.base_velocity.setZero();
    }
    return state;
}

inline void encode_state(const CodesignProblem& problem, const VariableLayout& l,
                         const CoupledState& state, int height_index, VecX& x)
{
    const int base = l.per_height * height_index;
    for (const auto& ev : l.entities) {
        const int i = problem.system.index_of(ev.kind);
        const auto& s = state.states[i];
        x.segment<3>(base + ev.offset) = s.base_position;
        x.segment<3>(base + ev.offset + 3) = log_so3(s.base_orientation);
        x.segment(base + ev.offset + 6, ev.n_dof) = s.joint_positions;
    }
}

/// Kinematic task residual at one height: environment frames hold their
/// captured poses, grasp frames reach the object handles, extra targets as
/// declared.
inline VecX height_constraints(const CodesignProblem& problem, const CoupledState& state,
                               const std::vector<Transform>& env_anchors,
                               const DesignParams& robot_params, int height_index)
{
    std::vector<KinematicsCache> caches;
    for (size_t i = 0; i < state.states.size(); ++i) {
        const auto& e = problem.system.entities()[i];
        caches.emplace_back(e.model, state.states[i],
                            e.kind == EntityKind::Robot ? robot_params : e.params);
    }
    // Hands reach the handle positions; the grasp itself is a velocity-level
    // lock, so the relative palm orientation stays free. Feet keep their
    // full anchor poses and the load pose is fixed per height.
    int rows = 6 * static_cast<int>(problem.system.env_contacts().size()) +
               3 * static_cast<int>(problem.system.grasps().size());
    for (const auto& t : problem.extra_targets) {
        rows += t.kind == FrameTarget::Kind::FullPose ? 6
              : t.kind == FrameTarget::Kind::Position ? 3 : 1;
    }
    VecX c(rows);
    int row = 0;
    for (size_t k = 0; k < problem.system.env_contacts().size(); ++k) {
        const auto& ec = problem.system.env_contacts()[k];
        const int i = problem.system.index_of(ec.agent);
        const Transform pose = caches[i].frame_kinematics(ec.frame).pose;
        c.segment<6>(row) = pose_error(pose, env_anchors[k]);
        row += 6;
    }
    const int obj = problem.system.index_of(EntityKind::Object);
    for (const auto& g : problem.system.grasps()) {
        const int i = problem.system.index_of(g.agent);
        const Transform pa = caches[i].frame_kinematics(g.agent_frame).pose;
        const Transform po = caches[obj].frame_kinematics(g.object_frame).pose;
        c.segment<3>(row) = pa.translation - po.translation;
        row += 3;
    }
    for (const auto& t : problem.extra_targets) {
        const int i = problem.system.index_of(t.entity);
        const Transform pose = caches[i].frame_kinematics(t.frame).pose;
        switch (t.kind) {
        case FrameTarget::Kind::FullPose:
            c.segment<6>(row) = pose_error(pose, t.target);
            row += 6;
            break;
        case FrameTarget::Kind::Position:
            c.segment<3>(row) = pose.translation - t.target.translation;
            row += 3;
            break;
        case FrameTarget::Kind::Height:
            c(row) = pose.translation.z() - problem.heights[height_index];
            row += 1;
            break;
        }
    }
    return c;
}

}  // namespace detail

/// Static-torque cost terms at the given per-height configurations:
/// T1 = sum_i |S_R tau|^2, T2 = sum_i |S_H tau|^2, T3 = 1 / com_z0^2.
inline std::array<double, 3> evaluate_costs(const CoupledSystem& system,
                                            const std::vector<CoupledState>& configurations,
                                            const DesignParams& robot_params)
{
    CoupledSystem sys = system;
    if (sys.has(EntityKind::Robot)) sys.set_robot_params(robot_params);
    double t1 = 0.0;
    double t2 = 0.0;
    for (const auto& state : configurations) {
        const auto statics = static_torques(sys, state);
        if (sys.has(EntityKind::Robot) && sys.entity(EntityKind::Robot).model.n_dof() > 0) {
            t1 += statics.of(sys, EntityKind::Robot).squaredNorm();
        }
        if (sys.has(EntityKind::Human) && sys.entity(EntityKind::Human).model.n_dof() > 0) {
            t2 += statics.of(sys, EntityKind::Human).squaredNorm();
        }
    }
    double t3 = 0.0;
    if (sys.has(EntityKind::Robot)) {
        const double com_z = detail::null_config_com_height(sys, robot_params);
        t3 = com_z > 1e-6 ? 1.0 / (com_z * com_z) : 1e12;
    }
    return {t1, t2, t3};
}

/// Gauss-Newton warm start for the per-height kinematic constraints.
/// Returns true when the residual drops below the tolerance.
inline bool ik_warm_start(const CodesignProblem& problem,
                          const std::vector<Transform>& env_anchors,
                          const DesignParams& robot_params, int height_index,
                          CoupledState& state, double tolerance = 1e-8,
                          int max_iterations = 150)
{
    // Single-height view of the problem so all indices below are zero.
    CodesignProblem single = problem;
    single.heights = {problem.heights.at(height_index)};

    const detail::VariableLayout layout = [&] {
        detail::VariableLayout l = detail::VariableLayout::of(single);
        l.n_heights = 1;
        l.pi_offset = l.per_height;
        l.n_pi = 0;
        return l;
    }();
    VecX x = VecX::Zero(layout.per_height);
    detail::encode_state(single, layout, state, 0, x);

    auto residual = [&](const VecX& xx) {
        const CoupledState s = detail::decode_state(single, layout, xx, 0, state);
        return detail::height_constraints(single, s, env_anchors, robot_params, 0);
    };
    double lambda = 1e-6;
    VecX c = residual(x);
    for (int it = 0; it < max_iterations; ++it) {
        if (c.cwiseAbs().maxCoeff() < tolerance) break;
        const MatX jac = detail::fd_jacobian(residual, x, static_cast<int>(c.size()), 1e-7);
        const MatX h = jac.transpose() * jac +
                       lambda * MatX::Identity(x.size(), x.size());
        const VecX step = h.ldlt().solve(-jac.transpose() * c);
        VecX x_new = x + step;
        // Keep joints inside their limits along the way.
        int col = 0;
        for (const auto& ev : layout.entities) {
            const auto& model = single.system.entity(ev.kind).model;
            for (int j = 0; j < model.n_joints(); ++j) {
                const int dof = model.joint_dof(j);
                if (dof < 0) continue;
                double& v = x_new(col + ev.offset + 6 + dof);
                v = std::clamp(v, model.joint(j).position_min,
                               model.joint(j).position_max);
            }
        }
        const VecX c_new = residual(x_new);
        if (c_new.norm() < c.norm()) {
            x = x_new;
            c = c_new;
            lambda = std::max(lambda * 0.5, 1e-9);
        } else {
            lambda *= 10.0;
            if (lambda > 1e6) break;
        }
    }
    if (c.cwiseAbs().maxCoeff() >= 1e-6) return false;
    state = detail::decode_state(single, layout, x, 0, state);
    return true;
}

/// Full morphology optimization. `initial` provides the per-height starting
/// configurations (posture seeds); each is refined by the warm start before
/// the joint posture+design solve.
inline CodesignResult solve_codesign(const CodesignProblem& problem,
                                     const std::vector<CoupledState>& initial,
                                     const NlpOptions& options = {})
{
    problem.validate();
    if (initial.size() != problem.heights.size()) {
        throw InvalidParameter("one initial configuration per height required");
    }
    const detail::VariableLayout layout = detail::VariableLayout::of(problem);
    const bool has_robot = problem.system.has(EntityKind::Robot);

    // Environment anchors from the first initial state.
    std::vector<Transform> env_anchors;
    {
        std::vector<KinematicsCache> caches;
        for (size_t i = 0; i < initial[0].states.size(); ++i) {
            const auto& e = problem.system.entities()[i];
            caches.emplace_back(e.model, initial[0].states[i], e.params);
        }
        for (const auto& ec : problem.system.env_contacts()) {
            const int i = problem.system.index_of(ec.agent);
            env_anchors.push_back(caches[i].frame_kinematics(ec.frame).pose);
        }
    }

    VecX pi0 = VecX::Ones(layout.n_pi);
    if (has_robot) {
        const auto& robot = problem.system.entity(EntityKind::Robot);
        if (!robot.params.empty()) {
            for (size_t k = 0; k < problem.design_links.size(); ++k) {
                pi0(k) = robot.params.length_multipliers(problem.design_links[k]);
            }
        }
    }
    const DesignParams params0 =
        has_robot ? detail::robot_params_with(problem.system, problem.design_links, pi0)
                  : DesignParams{};

    // Warm start every height; failure here means the problem is infeasible
    // at the initial design.
    std::vector<CoupledState> warm = initial;
    for (size_t i = 0; i < warm.size(); ++i) {
        if (!ik_warm_start(problem, env_anchors, params0, static_cast<int>(i), warm[i])) {
            CodesignResult out;
            out.status = NlpStatus::LineSearchFailure;
            out.pi_star = pi0;
            out.configurations = warm;
            out.constraint_residual = std::numeric_limits<double>::infinity();
            return out;
        }
    }

    VecX x0 = VecX::Zero(layout.size());
    for (int i = 0; i < layout.n_heights; ++i) {
        detail::encode_state(problem, layout, warm[i], i, x0);
    }
    x0.tail(layout.n_pi) = pi0;

    auto decode_all = [&](const VecX& x) {
        std::vector<CoupledState> states;
        states.reserve(layout.n_heights);
        for (int i = 0; i < layout.n_heights; ++i) {
            states.push_back(detail::decode_state(problem, layout, x, i, warm[i]));
        }
        return states;
    };
    auto params_of = [&](const VecX& x) {
        return has_robot ? detail::robot_params_with(problem.system, problem.design_links,
                                                     x.tail(layout.n_pi))
                         : DesignParams{};
    };

    NlpProblem nlp;
    nlp.objective = [&](const VecX& x) {
        const auto costs = evaluate_costs(problem.system, decode_all(x), params_of(x));
        return problem.w1 * costs[0] + problem.w2 * costs[1] + problem.w3 * costs[2];
    };
    nlp.equality = [&](const VecX& x) {
        const auto states = decode_all(x);
        const DesignParams params = params_of(x);
        std::vector<VecX> blocks;
        int rows = 0;
        for (int i = 0; i < layout.n_heights; ++i) {
            blocks.push_back(detail::height_constraints(problem, states[i], env_anchors,
                                                        params, i));
            rows += static_cast<int>(blocks.back().size());
        }
        VecX c(rows);
        int row = 0;
        for (const auto& b : blocks) {
            c.segment(row, b.size()) = b;
            row += static_cast<int>(b.size());
        }
        return c;
    };

    // Bounds: base pose box, joint limits, design bounds.
    const double inf = std::numeric_limits<double>::infinity();
    nlp.x_lower = VecX::Constant(layout.size(), -inf);
    nlp.x_upper = VecX::Constant(layout.size(), inf);
    for (int i = 0; i < layout.n_heights; ++i) {
        const int base = layout.per_height * i;
        for (const auto& ev : layout.entities) {
            for (int a = 0; a < 3; ++a) {
                nlp.x_lower(base + ev.offset + a) =
                    x0(base + ev.offset + a) - problem.base_position_range;
                nlp.x_upper(base + ev.offset + a) =
                    x0(base + ev.offset + a) + problem.base_position_range;
                nlp.x_lower(base + ev.offset + 3 + a) = -problem.base_rotation_range;
                nlp.x_upper(base + ev.offset + 3 + a) = problem.base_rotation_range;
            }
            const auto& model = problem.system.entity(ev.kind).model;
            for (int j = 0; j < model.n_joints(); ++j) {
                const int dof = model.joint_dof(j);
                if (dof < 0) continue;
                nlp.x_lower(base + ev.offset + 6 + dof) = model.joint(j).position_min;
                nlp.x_upper(base + ev.offset + 6 + dof) = model.joint(j).position_max;
            }
        }
    }
    if (layout.n_pi > 0) {
        nlp.x_lower.tail(layout.n_pi) = problem.pi_lower;
        nlp.x_upper.tail(layout.n_pi) = problem.pi_upper;
    }
    nlp.x0 = x0;

    const NlpSolution sol = solve_nlp(nlp, options);

    CodesignResult out;
    out.pi_star = layout.n_pi > 0 ? VecX(sol.x.tail(layout.n_pi)) : VecX();
    out.configurations = decode_all(sol.x);
    const auto costs = evaluate_costs(problem.system, out.configurations, params_of(sol.x));
    out.t1 = costs[0];
    out.t2 = costs[1];
    out.t3 = costs[2];
    out.objective = sol.objective;
    out.constraint_residual = sol.constraint_violation;
    out.stationarity = sol.stationarity;
    out.status = sol.status;
    out.iterations = sol.iterations;
    out.log = sol.log;
    return out;
}

struct SweepOptions {
    double load_mass{5.0};
    Vec3 load_dims{0.3, 0.5, 0.25};
    double load_forward_offset{0.35};  ///< load center ahead of the feet [m]
    NlpOptions solver{};
    int max_threads{4};
};

struct SweepResult {
    std::vector<double> heights;
    MatX torque;  ///< models x heights, NaN where infeasible
    VecX mean;    ///< normalized mean over models (NaN-safe)
    VecX stddev;
    double max_torque{0.0};
};

namespace detail {

struct SweepCell {
    double torque{std::numeric_limits<double>::quiet_NaN()};
    bool feasible{false};
};

/// Minimum-torque static posture of one human at one load height; the
/// stress index is the lumbosacral torque magnitude at that posture.
inline SweepCell sweep_cell(const MultibodyModel& human, const Anthropometry& anthro,
                            double height, const SweepOptions& options)
{
    CoupledSystem system;
    system.set_human(human);
    system.set_object(make_box_object(options.load_mass, options.load_dims));
    system.add_env_contact(EntityKind::Human, "sole_left");
    system.add_env_contact(EntityKind::Human, "sole_right");
    system.add_grasp(EntityKind::Human, "hand_left", "handle_left");
    system.add_grasp(EntityKind::Human, "hand_right", "handle_right");

    CodesignProblem problem;
    problem.system = system;
    problem.heights = {height};
    problem.object_pose.translation = Vec3(options.load_forward_offset, 0.0, height);
    problem.w1 = 0.0;
    problem.w2 = 1.0;
    problem.w3 = 0.0;

    // Posture seeds: upright reach, lumbar bend, knee squat.
    HumanModel hm{human, anthro};
    std::vector<CoupledState> seeds;
    auto seeded = [&](double bend, double squat) {
        CoupledState state = CoupledState::zero(problem.system);
        auto& hs = state.of(problem.system, EntityKind::Human);
        hs = standing_state(hm);
        auto set_joint = [&](const std::string& name, double value) {
            if (!human.has_joint(name)) return;
            const int dof = human.joint_dof(human.joint_index(name));
            if (dof >= 0) hs.joint_positions(dof) = value;
        };
        set_joint("jL5S1_roty", bend);
        set_joint("jT9T8_roty", 0.5 * bend);
        set_joint("jHip_left_roty", -squat);
        set_joint("jHip_right_roty", -squat);
        set_joint("jKnee_left_roty", 2.0 * squat);
        set_joint("jKnee_right_roty", 2.0 * squat);
        set_joint("jAnkle_left_roty", -squat);
        set_joint("jAnkle_right_roty", -squat);
        set_joint("jShoulder_left_roty", -0.6);
        set_joint("jShoulder_right_roty", -0.6);
        return state;
    };
    seeds.push_back(seeded(0.0, 0.0));
    seeds.push_back(seeded(0.8, 0.2));
    seeds.push_back(seeded(0.3, 0.6));

    for (const auto& seed : seeds) {
        std::vector<Transform> anchors;
        {
            KinematicsCache kin(human, seed.of(problem.system, EntityKind::Human), {});
            anchors.push_back(kin.frame_kinematics("sole_left").pose);
            anchors.push_back(kin.frame_kinematics("sole_right").pose);
        }
        CoupledState state = seed;
        if (!ik_warm_start(problem, anchors, {}, 0, state)) continue;

        NlpOptions opts = options.solver;
        const CodesignResult result = solve_codesign(problem, {state}, opts);
        if (result.status == NlpStatus::LineSearchFailure &&
            result.constraint_residual > 1e-4) {
            continue;
        }
        const auto statics = static_torques(problem.system, result.configurations[0]);
        SweepCell cell;
        cell.feasible = true;
        cell.torque = l5s1_magnitude(human, statics.of(problem.system, EntityKind::Human));
        return cell;
    }
    return {};
}

}  // namespace detail

/// Normalized lumbosacral stress against load height, averaged over models.
inline SweepResult ergonomics_sweep(const std::vector<HumanModel>& humans,
                                    double height_from, double height_to, double step,
                                    const SweepOptions& options = {})
{
    if (humans.empty()) throw InvalidParameter("sweep needs at least one human model");
    if (!(step > 0.0)) throw InvalidParameter("sweep step must be > 0");

    SweepResult out;
    for (double h = height_from; h <= height_to + 1e-9; h += step) {
        out.heights.push_back(h);
    }
    const int n_models = static_cast<int>(humans.size());
    const int n_heights = static_cast<int>(out.heights.size());
    out.torque = MatX::Constant(n_models, n_heights,
                                std::numeric_limits<double>::quiet_NaN());

    // Independent cells, evaluated in parallel batches.
    std::vector<std::pair<int, int>> cells;
    for (int m = 0; m < n_models; ++m) {
        for (int h = 0; h < n_heights; ++h) cells.emplace_back(m, h);
    }
    const int threads = std::max(1, options.max_threads);
    for (size_t begin = 0; begin < cells.size(); begin += threads) {
        std::vector<std::future<detail::SweepCell>> batch;
        const size_t end = std::min(cells.size(), begin + threads);
        for (size_t c = begin; c < end; ++c) {
            const auto [m, h] = cells[c];
            batch.push_back(std::async(std::launch::async, [&, m, h] {
                return detail::sweep_cell(humans[m].model, humans[m].anthropometry,
                                          out.heights[h], options);
            }));
        }
        for (size_t c = begin; c < end; ++c) {
            const auto cell = batch[c - begin].get();
            if (cell.feasible) {
                out.torque(cells[c].first, cells[c].second) = cell.torque;
            }
        }
    }

    out.max_torque = 0.0;
    for (int m = 0; m < n_models; ++m) {
        for (int h = 0; h < n_heights; ++h) {
            if (!std::isnan(out.torque(m, h))) {
                out.max_torque = std::max(out.max_torque, out.torque(m, h));
            }
        }
    }
    if (out.max_torque <= 0.0) throw NumericalError("sweep produced no feasible cells");

    out.mean = VecX::Constant(n_heights, std::numeric_limits<double>::quiet_NaN());
    out.stddev = VecX::Constant(n_heights, std::numeric_limits<double>::quiet_NaN());
    for (int h = 0; h < n_heights; ++h) {
        double sum = 0.0;
        double sq = 0.0;
        int count = 0;
        for (int m = 0; m < n_models; ++m) {
            if (std::isnan(out.torque(m, h))) continue;
            const double v = out.torque(m, h) / out.max_torque;
            sum += v;
            sq += v * v;
            ++count;
        }
        if (count > 0) {
            const double mean = sum / count;
            out.mean(h) = mean;
            out.stddev(h) = std::sqrt(std::max(0.0, sq / count - mean * mean));
        }
    }
    return out;
}

struct DesignComparison {
    std::vector<double> heights;
    struct Column {
        VecX human_l5s1;
        VecX human_torque_norm;
        VecX robot_torque_norm;
        std::vector<bool> feasible;
    };
    Column design_a;
    Column design_b;
};

/// Per-height static torques for two designs with postures re-optimized per
/// design (the design variables stay frozen).
inline DesignComparison compare_designs(const CodesignProblem& base,
                                        const std::vector<CoupledState>& initial,
                                        const VecX& pi_a, const VecX& pi_b,
                                        const NlpOptions& options = {})
{
    DesignComparison out;
    out.heights = base.heights;
    auto evaluate = [&](const VecX& pi) {
        DesignComparison::Column col;
        const int n = static_cast<int>(base.heights.size());
        col.human_l5s1 = VecX::Constant(n, std::numeric_limits<double>::quiet_NaN());
        col.human_torque_norm = col.human_l5s1;
        col.robot_torque_norm = col.human_l5s1;
        col.feasible.assign(n, false);

        CodesignProblem frozen = base;
        frozen.design_links.clear();
        frozen.pi_lower = VecX();
        frozen.pi_upper = VecX();
        if (frozen.system.has(EntityKind::Robot)) {
            frozen.system.set_robot_params(
                detail::robot_params_with(base.system, base.design_links, pi));
        }
        for (int i = 0; i < n; ++i) {
            CodesignProblem single = frozen;
            single.heights = {base.heights[i]};
            const CodesignResult result = solve_codesign(single, {initial[i]}, options);
            if (result.status == NlpStatus::LineSearchFailure &&
                result.constraint_residual > 1e-4) {
                continue;
            }
            const auto statics = static_torques(single.system, result.configurations[0]);
            col.feasible[i] = true;
            if (single.system.has(EntityKind::Human)) {
                const VecX human_tau = statics.of(single.system, EntityKind::Human);
                col.human_torque_norm(i) = human_tau.norm();
                col.human_l5s1(i) =
                    l5s1_magnitude(single.system.entity(EntityKind::Human).model,
                                   human_tau);
            }
            if (single.system.has(EntityKind::Robot) &&
                single.system.entity(EntityKind::Robot).model.n_dof() > 0) {
                col.robot_torque_norm(i) =
                    statics.of(single.system, EntityKind::Robot).norm();
            }
        }
        return col;
    };
    out.design_a = evaluate(pi_a);
    out.design_b = evaluate(pi_b);
    return out;
}

}  // namespace dyad
