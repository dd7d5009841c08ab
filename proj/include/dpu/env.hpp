#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dpu/rng.hpp"

namespace dpu {

struct Circle {
    double x = 0.0, y = 0.0, radius = 0.0;
};

// Square arena centered at the origin plus circular obstacles.
struct Scenario {
    std::string name;
    double arena_half_extent = 2.5;
    std::vector<Circle> obstacles;
};

enum class EnvMode { kAerial, kTerrestrial };

struct EnvSpec {
    EnvMode mode = EnvMode::kTerrestrial;
    std::size_t beam_count = 10;
    double fov_degrees = 180.0;
    double lidar_max_range = 3.5;
    std::vector<double> action_lo;   // per-component box
    std::vector<double> action_hi;
    double r_arrive = 100.0;
    double r_collide = -10.0;
    double goal_radius = 0.3;        // c_d
    double collision_radius = 0.19;  // c_o
    std::size_t max_episode_steps = 250;
    double dt = 0.1;
    double z_min = 0.5, z_max = 2.5;  // aerial only

    std::size_t observation_width() const;
    std::size_t action_width() const { return action_lo.size(); }
    // Beam directions relative to heading, bin centers tiling the field of view.
    std::vector<double> beam_angles() const;
    void validate() const;
};

EnvSpec default_spec(EnvMode mode);

enum class Outcome { kRunning, kArrive, kCollide, kTimeout };

const char* outcome_name(Outcome o);

struct Pose {
    double x = 0.0, y = 0.0, yaw = 0.0, z = 0.0;
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    Outcome outcome = Outcome::kRunning;
    double goal_distance = 0.0;
    double min_range = 0.0;
};

struct RewardResult {
    double reward = 0.0;
    bool done = false;
    Outcome outcome = Outcome::kRunning;
};

// Binary terminal reward: r_arrive on goal capture, r_collide on contact or
// step-limit expiry, 0 otherwise. Arrival wins when conditions co-occur.
RewardResult reward_fn(double goal_distance, double min_range, std::size_t ep,
                       const EnvSpec& spec);

// Analytic ray vs obstacle circles and arena walls; capped at max_range.
// Beam angles are relative to the pose heading.
std::vector<double> raycast(const Pose& pose, const Scenario& scenario,
                            const std::vector<double>& beam_angles, double max_range);

double wrap_angle(double a);  // to (-pi, pi]

class NavEnv {
public:
    NavEnv(EnvSpec spec, Scenario scenario);

    std::vector<double> reset(Rng& rng);
    StepResult step(const std::vector<double>& action);

    std::vector<double> observation() const;
    const Pose& pose() const { return pose_; }
    const EnvSpec& spec() const { return spec_; }
    const Scenario& scenario() const { return scenario_; }
    std::size_t episode_step() const { return ep_; }
    bool done() const { return done_; }
    double goal_x() const { return goal_x_; }
    double goal_y() const { return goal_y_; }
    double goal_z() const { return goal_z_; }

    // State-injection hooks for tests and trajectory analysis; rescans
    // the lidar so the observation stays consistent.
    void set_pose(const Pose& p);
    void set_goal(double x, double y, double z = 0.0);

private:
    double goal_distance() const;

    EnvSpec spec_;
    Scenario scenario_;
    std::vector<double> beam_angles_;
    Pose pose_;
    double goal_x_ = 0.0, goal_y_ = 0.0, goal_z_ = 0.0;
    double lin_vel_ = 0.0, ang_vel_ = 0.0;          // terrestrial command echo
    std::vector<double> prev_action_;               // aerial
    std::vector<double> scan_;
    std::size_t ep_ = 0;
    bool done_ = true;  // must reset before stepping
};

// The four named scenarios behind the known/unknown generalization protocol.
std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> find_builtin_scenario(const std::string& name);

// Plain-text scenario files: half_extent plus one obstacle line per circle.
Scenario load_scenario_file(const std::string& path);
void save_scenario_file(const Scenario& s, const std::string& path);

// Resolves a builtin name first, then falls back to a file path.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace dpu
