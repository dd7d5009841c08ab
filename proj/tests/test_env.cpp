#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "dpu/env.hpp"
#include "support/ray_march.hpp"

using namespace dpu;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("raycast: wall distance in an empty 5 m arena") {
    Scenario sc{"empty", 2.5, {}};
    const auto r = raycast({0, 0, 0}, sc, {0.0}, 10.0);
    CHECK(r[0] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("raycast: obstacle two meters ahead") {
    Scenario sc{"one", 5.0, {{2.0, 0.0, 0.5}}};
    const auto r = raycast({0, 0, 0}, sc, {0.0}, 10.0);
    CHECK(r[0] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("raycast: capped at max range") {
    Scenario sc{"empty", 5.0, {}};
    const auto r = raycast({0, 0, 0}, sc, {0.0}, 2.0);
    CHECK(r[0] == 2.0);
}

TEST_CASE("raycast: pose inside an obstacle still yields a range") {
    Scenario sc{"one", 5.0, {{0.0, 0.0, 0.5}}};
    const auto r = raycast({0, 0, 0}, sc, {0.0}, 10.0);
    CHECK(r[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("raycast: randomized agreement with the ray-marching oracle") {
    Rng rng(555);
    const auto scenarios = builtin_scenarios();
    for (int trial = 0; trial < 500; ++trial) {
        const Scenario& sc = scenarios[rng.index(scenarios.size())];
        const double h = sc.arena_half_extent;
        Pose p{rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-kPi, kPi)};
        if (!testsupport::point_free(p.x, p.y, sc)) continue;
        const double angle = rng.uniform(-kPi, kPi);
        const double got = raycast(p, sc, {angle}, 5.0)[0];
        const double want = testsupport::ray_march(p, sc, angle, 5.0);
        CHECK(std::abs(got - want) < 1e-3);
    }
}

TEST_CASE("reward_fn: aerial boundary suite") {
    const EnvSpec s = default_spec(EnvMode::kAerial);
    SUBCASE("arrival") {
        const auto r = reward_fn(0.4, 3.0, 10, s);
        CHECK(r.reward == 200.0);
        CHECK(r.done);
        CHECK(r.outcome == Outcome::kArrive);
    }
    SUBCASE("collision") {
        const auto r = reward_fn(3.0, 0.45, 10, s);
        CHECK(r.reward == -20.0);
        CHECK(r.outcome == Outcome::kCollide);
    }
    SUBCASE("timeout at ep=500") {
        const auto r = reward_fn(3.0, 2.0, 500, s);
        CHECK(r.reward == -20.0);
        CHECK(r.outcome == Outcome::kTimeout);
    }
    SUBCASE("all clear: binary zero") {
        const auto r = reward_fn(3.0, 2.0, 10, s);
        CHECK(r.reward == 0.0);
        CHECK_FALSE(r.done);
    }
    SUBCASE("arrival dominates a simultaneous collision") {
        const auto r = reward_fn(0.4, 0.4, 500, s);
        CHECK(r.reward == 200.0);
        CHECK(r.outcome == Outcome::kArrive);
    }
}

TEST_CASE("reward_fn: terrestrial boundary suite") {
    const EnvSpec s = default_spec(EnvMode::kTerrestrial);
    CHECK(reward_fn(0.29, 1.0, 3, s).reward == 100.0);
    CHECK(reward_fn(1.0, 0.18, 3, s).reward == -10.0);
    CHECK(reward_fn(1.0, 1.0, 250, s).reward == -10.0);
    const auto clear = reward_fn(1.0, 0.5, 3, s);
    CHECK(clear.reward == 0.0);
    CHECK_FALSE(clear.done);
}

TEST_CASE("step: terrestrial straight-line kinematics") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), Scenario{"empty", 2.5, {}});
    Rng rng(1);
    env.reset(rng);
    env.set_pose({0, 0, 0});
    env.set_goal(2.0, 2.0);
    const auto res = env.step({0.25, 0.0});
    CHECK(env.pose().x == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(env.pose().y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(res.done);
}

TEST_CASE("step: out-of-box action is clamped before integration") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), Scenario{"empty", 2.5, {}});
    Rng rng(1);
    env.reset(rng);
    env.set_pose({0, 0, 0});
    env.set_goal(2.0, 2.0);
    env.step({9.0, 0.0});
    CHECK(env.pose().x == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("step: arrival within the terrestrial capture radius") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), Scenario{"empty", 2.5, {}});
    Rng rng(1);
    env.reset(rng);
    env.set_pose({0, 0, 0});
    env.set_goal(0.315, 0.0);  // one forward step lands at distance 0.29
    const auto res = env.step({0.25, 0.0});
    CHECK(res.reward == 100.0);
    CHECK(res.done);
    CHECK(res.outcome == Outcome::kArrive);
}

TEST_CASE("step: stepping a done environment is rejected") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), Scenario{"empty", 2.5, {}});
    CHECK_THROWS(env.step({0.1, 0.0}));
}

TEST_CASE("step: zero action is a pose fixed point") {
    for (EnvMode mode : {EnvMode::kTerrestrial, EnvMode::kAerial}) {
        NavEnv env(default_spec(mode), Scenario{"empty", 5.0, {}});
        Rng rng(3);
        env.reset(rng);
        const Pose before = env.pose();
        env.step(std::vector<double>(env.spec().action_width(), 0.0));
        CHECK(env.pose().x == before.x);
        CHECK(env.pose().y == before.y);
        CHECK(env.pose().yaw == before.yaw);
        CHECK(env.pose().z == before.z);
    }
}

TEST_CASE("step: aerial altitude integrates and clamps to z bounds") {
    NavEnv env(default_spec(EnvMode::kAerial), Scenario{"empty", 5.0, {}});
    Rng rng(4);
    env.reset(rng);
    env.set_pose({0, 0, 0, 2.49});
    env.set_goal(4.0, 4.0, 1.0);
    for (int i = 0; i < 5 && !env.done(); ++i) env.step({0.0, 0.25, 0.0});
    CHECK(env.pose().z == 2.5);
}

TEST_CASE("observation: widths are exactly 26 aerial / 14 terrestrial") {
    for (auto [mode, width] : {std::pair{EnvMode::kAerial, std::size_t{26}},
                               std::pair{EnvMode::kTerrestrial, std::size_t{14}}}) {
        NavEnv env(default_spec(mode), Scenario{"empty", 5.0, {}});
        Rng rng(5);
        auto obs = env.reset(rng);
        CHECK(obs.size() == width);
        for (int i = 0; i < 20 && !env.done(); ++i) {
            obs = env.step(std::vector<double>(env.spec().action_width(), 0.1)).observation;
            CHECK(obs.size() == width);
        }
    }
}

TEST_CASE("observation: normalized ranges stay in [0,1]") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), *find_builtin_scenario("terrestrial-train"));
    Rng rng(6);
    auto obs = env.reset(rng);
    for (int i = 0; i < 100 && !env.done(); ++i) {
        for (std::size_t k = 0; k < env.spec().beam_count; ++k) {
            CHECK(obs[k] >= 0.0);
            CHECK(obs[k] <= 1.0);
        }
        obs = env.step({0.2, 0.05}).observation;
    }
}

TEST_CASE("observation: relative goal angle is yaw-invariant under joint rotation") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), Scenario{"empty", 5.0, {}});
    Rng rng(7);
    env.reset(rng);

    env.set_pose({1.0, 0.5, 0.3});
    env.set_goal(2.0, 2.0);
    const double a1 = env.observation()[11];  // rel-angle slot

    const double rot = 1.1;
    const double c = std::cos(rot), s = std::sin(rot);
    // Rotate pose and goal about the robot's position.
    env.set_pose({1.0, 0.5, wrap_angle(0.3 + rot)});
    env.set_goal(1.0 + c * (2.0 - 1.0) - s * (2.0 - 0.5), 0.5 + s * (2.0 - 1.0) + c * (2.0 - 0.5));
    const double a2 = env.observation()[11];
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-12));
}

TEST_CASE("reset: contract, clearance, and determinism") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), *find_builtin_scenario("terrestrial-train"));
    SUBCASE("ep=0 and not done after reset") {
        Rng rng(8);
        env.reset(rng);
        CHECK(env.episode_step() == 0);
        CHECK_FALSE(env.done());
    }
    SUBCASE("clearance constraints hold over many resets") {
        Rng rng(9);
        const auto& sc = env.scenario();
        const double clear = env.spec().collision_radius + 0.2;
        for (int i = 0; i < 1000; ++i) {
            env.reset(rng);
            for (auto [px, py] : {std::pair{env.pose().x, env.pose().y},
                                  std::pair{env.goal_x(), env.goal_y()}}) {
                CHECK(std::abs(px) <= sc.arena_half_extent - clear + 1e-12);
                CHECK(std::abs(py) <= sc.arena_half_extent - clear + 1e-12);
                for (const Circle& o : sc.obstacles)
                    CHECK(std::hypot(px - o.x, py - o.y) >= o.radius + clear - 1e-12);
            }
            CHECK(std::hypot(env.goal_x() - env.pose().x, env.goal_y() - env.pose().y) >=
                  0.5 * sc.arena_half_extent - 1e-12);
        }
    }
    SUBCASE("identical seed gives identical start and goal") {
        Rng a(77), b(77);
        env.reset(a);
        const Pose p1 = env.pose();
        const double g1x = env.goal_x(), g1y = env.goal_y();
        env.reset(b);
        CHECK(env.pose().x == p1.x);
        CHECK(env.pose().y == p1.y);
        CHECK(env.pose().yaw == p1.yaw);
        CHECK(env.goal_x() == g1x);
        CHECK(env.goal_y() == g1y);
    }
}

TEST_CASE("reset: over-dense scenario reported as a configuration error") {
    Scenario dense{"dense", 0.3, {}};
    NavEnv env(default_spec(EnvMode::kTerrestrial), dense);
    Rng rng(10);
    CHECK_THROWS(env.reset(rng));
}

TEST_CASE("builtin_scenarios: counts and containment") {
    const auto all = builtin_scenarios();
    REQUIRE(all.size() == 4);
    CHECK(find_builtin_scenario("aerial-train")->obstacles.size() == 4);
    CHECK(find_builtin_scenario("aerial-eval")->obstacles.size() == 1);
    CHECK(find_builtin_scenario("aerial-eval")->obstacles[0].x == 0.0);
    CHECK(find_builtin_scenario("terrestrial-train")->obstacles.size() == 3);
    CHECK(find_builtin_scenario("terrestrial-eval")->obstacles.size() == 4);
    for (const auto& sc : all)
        for (const auto& o : sc.obstacles) {
            CHECK(std::abs(o.x) + o.radius < sc.arena_half_extent);
            CHECK(std::abs(o.y) + o.radius < sc.arena_half_extent);
            CHECK(o.radius > 0.0);
        }
}

TEST_CASE("scenario files: round trip and malformed input") {
    const std::string path = "test_scenario_tmp.txt";
    Scenario sc{"demo", 3.0, {{1.0, -0.5, 0.4}, {-1.0, 1.0, 0.3}}};
    save_scenario_file(sc, path);
    const Scenario back = load_scenario_file(path);
    CHECK(back.name == "demo");
    CHECK(back.arena_half_extent == 3.0);
    REQUIRE(back.obstacles.size() == 2);
    CHECK(back.obstacles[1].radius == 0.3);
    std::remove(path.c_str());

    const std::string bad = "test_scenario_bad.txt";
    {
        std::ofstream out(bad);
        out << "half_extent 2\nwall 1 2 3\n";
    }
    CHECK_THROWS(load_scenario_file(bad));
    std::remove(bad.c_str());
}

TEST_CASE("beam layout: aerial bin centers tile 270 degrees") {
    const EnvSpec s = default_spec(EnvMode::kAerial);
    const auto angles = s.beam_angles();
    REQUIRE(angles.size() == 20);
    const double deg = 180.0 / kPi;
    CHECK(angles.front() * deg == doctest::Approx(-135.0 + 0.5 * 13.5));
    CHECK(angles.back() * deg == doctest::Approx(135.0 - 0.5 * 13.5));
    for (std::size_t i = 1; i < angles.size(); ++i)
        CHECK((angles[i] - angles[i - 1]) * deg == doctest::Approx(13.5));
}

TEST_CASE("episode: terminal rewards only, zero elsewhere, bounded length") {
    NavEnv env(default_spec(EnvMode::kTerrestrial), *find_builtin_scenario("terrestrial-train"));
    Rng rng(11);
    Rng act(12);
    for (int ep = 0; ep < 20; ++ep) {
        env.reset(rng);
        std::size_t steps = 0;
        while (!env.done()) {
            const auto res = env.step({act.uniform(0.0, 0.25), act.uniform(-0.25, 0.25)});
            ++steps;
            if (res.done) {
                CHECK((res.reward == 100.0 || res.reward == -10.0));
            } else {
                CHECK(res.reward == 0.0);
            }
        }
        CHECK(steps <= env.spec().max_episode_steps);
    }
}
