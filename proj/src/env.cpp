#include "dpu/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dpu {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
// Minimum clearance from obstacle surfaces and walls when sampling poses.
constexpr double kSpawnMargin = 0.2;

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

}  // namespace

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

std::size_t EnvSpec::observation_width() const {
    // ranges + (prev action | velocity echo) + goal descriptors
    return mode == EnvMode::kAerial ? beam_count + 3 + 3 : beam_count + 4;
}

std::vector<double> EnvSpec::beam_angles() const {
    std::vector<double> angles(beam_count);
    const double fov = fov_degrees * kDeg;
    const double bin = fov / static_cast<double>(beam_count);
    for (std::size_t k = 0; k < beam_count; ++k)
        angles[k] = -0.5 * fov + (static_cast<double>(k) + 0.5) * bin;
    return angles;
}

void EnvSpec::validate() const {
    if (beam_count < 1) throw std::invalid_argument("env: beam_count must be >= 1");
    if (collision_radius > goal_radius)
        throw std::invalid_argument("env: collision radius exceeds goal radius");
    if (max_episode_steps < 1)
        throw std::invalid_argument("env: max_episode_steps must be >= 1");
    if (action_lo.size() != action_hi.size() || action_lo.empty())
        throw std::invalid_argument("env: malformed action box");
    for (std::size_t i = 0; i < action_lo.size(); ++i)
        if (action_lo[i] > action_hi[i])
            throw std::invalid_argument("env: action box lo > hi");
    if (lidar_max_range <= 0.0) throw std::invalid_argument("env: bad lidar range");
    if (dt <= 0.0) throw std::invalid_argument("env: bad dt");
}

EnvSpec default_spec(EnvMode mode) {
    EnvSpec s;
    s.mode = mode;
    if (mode == EnvMode::kAerial) {
        s.beam_count = 20;
        s.fov_degrees = 270.0;
        s.lidar_max_range = 5.0;
        s.action_lo = {0.0, -0.25, -0.25};   // v, v_z, delta-yaw
        s.action_hi = {0.25, 0.25, 0.25};
        s.r_arrive = 200.0;
        s.r_collide = -20.0;
        s.goal_radius = 0.5;
        s.collision_radius = 0.5;
        s.max_episode_steps = 500;
        s.z_min = 0.5;
        s.z_max = 2.5;
    } else {
        s.beam_count = 10;
        s.fov_degrees = 180.0;
        s.lidar_max_range = 3.5;
        s.action_lo = {0.0, -0.25};          // v, omega
        s.action_hi = {0.25, 0.25};
        s.r_arrive = 100.0;
        s.r_collide = -10.0;
        s.goal_radius = 0.3;
        s.collision_radius = 0.19;
        s.max_episode_steps = 250;
    }
    s.dt = 0.1;
    return s;
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::kRunning: return "running";
        case Outcome::kArrive: return "arrive";
        case Outcome::kCollide: return "collide";
        case Outcome::kTimeout: return "timeout";
    }
    return "?";
}

RewardResult reward_fn(double goal_distance, double min_range, std::size_t ep,
                       const EnvSpec& spec) {
    if (goal_distance < spec.goal_radius)
        return {spec.r_arrive, true, Outcome::kArrive};
    if (min_range < spec.collision_radius)
        return {spec.r_collide, true, Outcome::kCollide};
    if (ep >= spec.max_episode_steps)
        return {spec.r_collide, true, Outcome::kTimeout};
    return {0.0, false, Outcome::kRunning};
}

std::vector<double> raycast(const Pose& pose, const Scenario& scenario,
                            const std::vector<double>& beam_angles, double max_range) {
    std::vector<double> ranges(beam_angles.size(), max_range);
    const double h = scenario.arena_half_extent;
    for (std::size_t k = 0; k < beam_angles.size(); ++k) {
        const double ang = pose.yaw + beam_angles[k];
        const double dx = std::cos(ang);
        const double dy = std::sin(ang);
        double best = max_range;

        // Walls x = +/-h, y = +/-h; accept hits on the wall segment.
        auto wall_hit = [&](double t, double along, double limit) {
            if (t >= 0.0 && std::abs(along) <= limit + 1e-12) best = std::min(best, t);
        };
        if (dx > 1e-15) wall_hit((h - pose.x) / dx, pose.y + dy * (h - pose.x) / dx, h);
        if (dx < -1e-15) wall_hit((-h - pose.x) / dx, pose.y + dy * (-h - pose.x) / dx, h);
        if (dy > 1e-15) wall_hit((h - pose.y) / dy, pose.x + dx * (h - pose.y) / dy, h);
        if (dy < -1e-15) wall_hit((-h - pose.y) / dy, pose.x + dx * (-h - pose.y) / dy, h);

        for (const Circle& c : scenario.obstacles) {
            const double ox = pose.x - c.x;
            const double oy = pose.y - c.y;
            const double b = ox * dx + oy * dy;
            const double q = ox * ox + oy * oy - c.radius * c.radius;
            const double disc = b * b - q;
            if (disc < 0.0) continue;
            const double root = std::sqrt(disc);
            double t = -b - root;
            if (t < 0.0) t = -b + root;  // origin inside the circle
            if (t >= 0.0) best = std::min(best, t);
        }
        ranges[k] = std::min(best, max_range);
    }
    return ranges;
}

NavEnv::NavEnv(EnvSpec spec, Scenario scenario)
    : spec_(std::move(spec)), scenario_(std::move(scenario)) {
    spec_.validate();
    const double h = scenario_.arena_half_extent;
    for (const Circle& c : scenario_.obstacles) {
        if (c.radius <= 0.0) throw std::invalid_argument("scenario: obstacle radius <= 0");
        if (std::abs(c.x) + c.radius > h || std::abs(c.y) + c.radius > h)
            throw std::invalid_argument("scenario: obstacle outside arena");
    }
    beam_angles_ = spec_.beam_angles();
    prev_action_.assign(spec_.action_width(), 0.0);
}

double NavEnv::goal_distance() const {
    const double dx = goal_x_ - pose_.x;
    const double dy = goal_y_ - pose_.y;
    double d2 = dx * dx + dy * dy;
    if (spec_.mode == EnvMode::kAerial) {
        const double dz = goal_z_ - pose_.z;
        d2 += dz * dz;
    }
    return std::sqrt(d2);
}

void NavEnv::set_pose(const Pose& p) {
    pose_ = p;
    scan_ = raycast(pose_, scenario_, beam_angles_, spec_.lidar_max_range);
}

void NavEnv::set_goal(double x, double y, double z) {
    goal_x_ = x;
    goal_y_ = y;
    goal_z_ = z;
}

std::vector<double> NavEnv::reset(Rng& rng) {
    const double h = scenario_.arena_half_extent;
    const double clear = spec_.collision_radius + kSpawnMargin;
    auto free_point = [&](double x, double y) {
        if (std::abs(x) > h - clear || std::abs(y) > h - clear) return false;
        for (const Circle& c : scenario_.obstacles) {
            const double dx = x - c.x, dy = y - c.y;
            if (std::hypot(dx, dy) < c.radius + clear) return false;
        }
        return true;
    };

    const std::size_t kMaxTries = 10000;
    double sx = 0, sy = 0, gx = 0, gy = 0;
    bool ok = false;
    for (std::size_t i = 0; i < kMaxTries && !ok; ++i) {
        sx = rng.uniform(-h, h);
        sy = rng.uniform(-h, h);
        ok = free_point(sx, sy);
    }
    if (!ok) throw std::runtime_error("reset: no free start pose (scenario too dense)");
    ok = false;
    for (std::size_t i = 0; i < kMaxTries && !ok; ++i) {
        gx = rng.uniform(-h, h);
        gy = rng.uniform(-h, h);
        ok = free_point(gx, gy) && std::hypot(gx - sx, gy - sy) >= 0.5 * h;
    }
    if (!ok) throw std::runtime_error("reset: no admissible goal (scenario too dense)");

    pose_.x = sx;
    pose_.y = sy;
    pose_.yaw = rng.uniform(-kPi, kPi);
    goal_x_ = gx;
    goal_y_ = gy;
    if (spec_.mode == EnvMode::kAerial) {
        pose_.z = rng.uniform(spec_.z_min, spec_.z_max);
        goal_z_ = rng.uniform(spec_.z_min, spec_.z_max);
    } else {
        pose_.z = 0.0;
        goal_z_ = 0.0;
    }
    lin_vel_ = 0.0;
    ang_vel_ = 0.0;
    std::fill(prev_action_.begin(), prev_action_.end(), 0.0);
    ep_ = 0;
    done_ = false;
    scan_ = raycast(pose_, scenario_, beam_angles_, spec_.lidar_max_range);
    return observation();
}

StepResult NavEnv::step(const std::vector<double>& action) {
    if (done_) throw std::runtime_error("step: episode already done, reset first");
    if (action.size() != spec_.action_width())
        throw std::invalid_argument("step: action width mismatch");

    std::vector<double> a(action.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = clamp(action[i], spec_.action_lo[i], spec_.action_hi[i]);

    const double h = scenario_.arena_half_extent;
    if (spec_.mode == EnvMode::kTerrestrial) {
        lin_vel_ = a[0];
        ang_vel_ = a[1];
        pose_.yaw = wrap_angle(pose_.yaw + ang_vel_ * spec_.dt);
        pose_.x += lin_vel_ * std::cos(pose_.yaw) * spec_.dt;
        pose_.y += lin_vel_ * std::sin(pose_.yaw) * spec_.dt;
    } else {
        // Delta-yaw is radians per step, not a rate.
        pose_.yaw = wrap_angle(pose_.yaw + a[2]);
        pose_.x += a[0] * std::cos(pose_.yaw) * spec_.dt;
        pose_.y += a[0] * std::sin(pose_.yaw) * spec_.dt;
        pose_.z = clamp(pose_.z + a[1] * spec_.dt, spec_.z_min, spec_.z_max);
    }
    pose_.x = clamp(pose_.x, -h, h);
    pose_.y = clamp(pose_.y, -h, h);
    prev_action_ = a;

    scan_ = raycast(pose_, scenario_, beam_angles_, spec_.lidar_max_range);
    const double min_range = *std::min_element(scan_.begin(), scan_.end());
    const double d = goal_distance();
    ep_ += 1;
    const RewardResult rw = reward_fn(d, min_range, ep_, spec_);
    done_ = rw.done;

    StepResult out;
    out.observation = observation();
    out.reward = rw.reward;
    out.done = rw.done;
    out.outcome = rw.outcome;
    out.goal_distance = d;
    out.min_range = min_range;
    return out;
}

std::vector<double> NavEnv::observation() const {
    std::vector<double> obs;
    obs.reserve(spec_.observation_width());
    for (double r : scan_) obs.push_back(r / spec_.lidar_max_range);

    const double diag = 2.0 * scenario_.arena_half_extent * std::numbers::sqrt2;
    const double dx = goal_x_ - pose_.x;
    const double dy = goal_y_ - pose_.y;
    const double planar = std::hypot(dx, dy);
    const double rel_angle = wrap_angle(std::atan2(dy, dx) - pose_.yaw);

    if (spec_.mode == EnvMode::kAerial) {
        for (double v : prev_action_) obs.push_back(v);
        obs.push_back(planar / diag);
        obs.push_back(rel_angle);
        obs.push_back(goal_z_ - pose_.z);
    } else {
        obs.push_back(planar / diag);
        obs.push_back(rel_angle);
        obs.push_back(lin_vel_);
        obs.push_back(ang_vel_);
    }
    return obs;
}

std::vector<Scenario> builtin_scenarios() {
    // Geometry approximates the published scenario figures; override via
    // scenario files for other layouts.
    Scenario at{"aerial-train", 5.0, {{2.0, 2.0, 0.5}, {-2.0, 2.0, 0.5}, {2.0, -2.0, 0.5}, {-2.0, -2.0, 0.5}}};
    Scenario ae{"aerial-eval", 5.0, {{0.0, 0.0, 0.5}}};
    Scenario tt{"terrestrial-train", 2.5, {{0.0, 1.1, 0.5}, {-1.1, -0.8, 0.5}, {1.1, -0.8, 0.5}}};
    Scenario te{"terrestrial-eval", 2.5, {{1.25, 1.25, 0.5}, {-1.25, 1.25, 0.5}, {1.25, -1.25, 0.5}, {-1.25, -1.25, 0.5}}};
    return {at, ae, tt, te};
}

std::optional<Scenario> find_builtin_scenario(const std::string& name) {
    for (auto& s : builtin_scenarios())
        if (s.name == name) return s;
    return std::nullopt;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    Scenario s;
    s.name = path;
    s.arena_half_extent = 0.0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        if (key == "name") {
            ls >> s.name;
        } else if (key == "half_extent") {
            if (!(ls >> s.arena_half_extent))
                throw std::runtime_error(path + ": bad half_extent");
        } else if (key == "obstacle") {
            Circle c;
            if (!(ls >> c.x >> c.y >> c.radius))
                throw std::runtime_error(path + ": bad obstacle at line " + std::to_string(lineno));
            s.obstacles.push_back(c);
        } else {
            throw std::runtime_error(path + ": unknown key '" + key + "'");
        }
    }
    if (s.arena_half_extent <= 0.0)
        throw std::runtime_error(path + ": missing or non-positive half_extent");
    return s;
}

void save_scenario_file(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << "name " << s.name << "\n";
    out << "half_extent " << s.arena_half_extent << "\n";
    for (const Circle& c : s.obstacles)
        out << "obstacle " << c.x << " " << c.y << " " << c.radius << "\n";
}

Scenario resolve_scenario(const std::string& name_or_path) {
    if (auto s = find_builtin_scenario(name_or_path)) return *s;
    return load_scenario_file(name_or_path);
}

}  // namespace dpu
