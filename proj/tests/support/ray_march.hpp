#pragma once

#include <cmath>

#include "dpu/env.hpp"

// Brute-force ray-marching range oracle, independent of the analytic
// intersection code: walk the ray in fixed steps until the point leaves
// free space.
namespace dpu::testsupport {

inline bool point_free(double x, double y, const Scenario& sc) {
    const double h = sc.arena_half_extent;
    if (std::abs(x) > h || std::abs(y) > h) return false;
    for (const Circle& c : sc.obstacles) {
        const double dx = x - c.x, dy = y - c.y;
        if (dx * dx + dy * dy < c.radius * c.radius) return false;
    }
    return true;
}

inline double ray_march(const Pose& pose, const Scenario& sc, double angle,
                        double max_range, double step = 1e-4) {
    const double a = pose.yaw + angle;
    const double dx = std::cos(a), dy = std::sin(a);
    for (double t = step; t <= max_range; t += step) {
        if (!point_free(pose.x + t * dx, pose.y + t * dy, sc)) return t;
    }
    return max_range;
}

}  // namespace dpu::testsupport
