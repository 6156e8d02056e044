#include <catch2/catch_amalgamated.hpp>

#include <dyad/shapes.hpp>

#include "oracles.hpp"

#include <random>

using namespace dyad;

TEST_CASE("unit cube matches the textbook values")
{
    const auto mp = inertia_from_shape(ShapeGeom::box(1.0, 1.0, 1.0), 1.0, 1.0);
    CHECK(mp.mass == Catch::Approx(1.0));
    CHECK(mp.com.norm() == Catch::Approx(0.0).margin(1e-14));
    // Shape centered at the link origin, so origin inertia == CoM inertia.
    CHECK(mp.inertia(0, 0) == Catch::Approx(1.0 / 6.0));
    CHECK(mp.inertia(1, 1) == Catch::Approx(1.0 / 6.0));
    CHECK(mp.inertia(2, 2) == Catch::Approx(1.0 / 6.0));
    CHECK(mp.inertia(0, 1) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("unit sphere with density 3/(4 pi)")
{
    const double rho = 3.0 / (4.0 * std::numbers::pi);
    const auto mp = inertia_from_shape(ShapeGeom::sphere(1.0), rho, 1.0);
    CHECK(mp.mass == Catch::Approx(1.0));
    CHECK((mp.inertia - 0.4 * Mat3::Identity()).norm() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("mass is linear in the length multiplier")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.3, 2.0);
    const ShapeGeom shapes[] = {
        ShapeGeom::sphere(0.4),
        ShapeGeom::cylinder(0.2, 0.9),
        ShapeGeom::box(0.3, 0.5, 0.7, Vec3::UnitY()),
    };
    for (const auto& shape : shapes) {
        const double rho = 100.0 * u(rng);
        const double lm = u(rng);
        const double m1 = inertia_from_shape(shape, rho, 1.0).mass;
        const double mlm = inertia_from_shape(shape, rho, lm).mass;
        CHECK(std::abs(mlm - lm * m1) <= 1e-12 * std::max(1.0, mlm));
    }
}

TEST_CASE("closed forms match voxel integration")
{
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto random_shape = [&](int kind) {
        switch (kind) {
        case 0: return ShapeGeom::sphere(0.2 + 0.6 * u01(rng));
        case 1: return ShapeGeom::cylinder(0.1 + 0.3 * u01(rng), 0.3 + 0.8 * u01(rng));
        default: {
            const int axis = static_cast<int>(3 * u01(rng)) % 3;
            return ShapeGeom::box(0.2 + 0.5 * u01(rng), 0.2 + 0.5 * u01(rng),
                                  0.2 + 0.5 * u01(rng), Vec3::Unit(axis));
        }
        }
    };
    for (int trial = 0; trial < 6; ++trial) {
        const ShapeGeom shape = random_shape(trial % 3);
        const double rho = 200.0 + 1800.0 * u01(rng);
        const double lm = 0.5 + 1.5 * u01(rng);
        const auto closed = inertia_from_shape(shape, rho, lm);
        const auto grid = oracles::integrate_shape(shape, rho, lm);
        CHECK(std::abs(grid.mass - closed.mass) / closed.mass < 1e-5);
        CHECK((grid.com - closed.com).norm() < 1e-5 * std::max(1.0, closed.com.norm()));
        CHECK((grid.inertia - closed.inertia).norm() / closed.inertia.norm() < 1e-5);
    }
}

TEST_CASE("offset placement applies the parallel axis shift")
{
    Transform frame;
    frame.translation = Vec3(0.1, -0.2, 0.3);
    frame.rotation = rotation_about(Vec3::UnitY(), 0.7);
    const ShapeGeom shape = ShapeGeom::cylinder(0.15, 0.6);
    const double rho = 900.0;
    const double lm = 1.4;
    const auto closed = inertia_from_shape(shape, rho, lm, frame);
    const auto grid = oracles::integrate_shape(shape, rho, lm, frame);
    CHECK(std::abs(grid.mass - closed.mass) / closed.mass < 1e-5);
    CHECK((grid.com - closed.com).norm() < 1e-5);
    CHECK((grid.inertia - closed.inertia).norm() / closed.inertia.norm() < 1e-5);
}

TEST_CASE("invalid shape parameters are rejected")
{
    CHECK_THROWS_AS(inertia_from_shape(ShapeGeom::sphere(-1.0), 1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(inertia_from_shape(ShapeGeom::sphere(1.0), -1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(inertia_from_shape(ShapeGeom::sphere(1.0), 1.0, 0.0), InvalidParameter);
    ShapeGeom bad_axis = ShapeGeom::box(1.0, 1.0, 1.0);
    bad_axis.principal_axis = Vec3(0.5, 0.5, 0.0);
    CHECK_THROWS_AS(inertia_from_shape(bad_axis, 1.0, 1.0), InvalidParameter);
}

TEST_CASE("spatial inertia block structure")
{
    const auto mp = inertia_from_shape(ShapeGeom::box(0.2, 0.3, 0.4), 800.0, 1.2,
                                       {Mat3::Identity(), Vec3(0.05, 0.0, 0.1)});
    const auto si = SpatialInertia::from_mass_properties(mp);
    const Mat6 m = si.matrix();
    CHECK((m - m.transpose()).norm() == Catch::Approx(0.0).margin(1e-12));
    CHECK((m.topLeftCorner<3, 3>() - mp.mass * Mat3::Identity()).norm() ==
          Catch::Approx(0.0).margin(1e-12));
    Eigen::SelfAdjointEigenSolver<Mat6> es(m);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}
