#pragma once

#include "blm/common.hpp"

namespace blm {

// Channel-with-obstacle benchmark geometry. Axis-aligned boxes only.
struct Geometry {
    Vec2 channel_min{0.0, 0.0};
    Vec2 channel_max{4.0, 1.0};
    bool has_obstacle = true;
    Vec2 obstacle_min{0.5, 0.45};
    Vec2 obstacle_max{0.6, 0.55};

    // Channel [0,4]x[0,1] with the square obstacle [0.5,0.6]x[0.45,0.55].
    static Geometry channel_with_obstacle() { return Geometry{}; }

    static Geometry channel_only(Vec2 lo, Vec2 hi) {
        Geometry g;
        g.channel_min = lo;
        g.channel_max = hi;
        g.has_obstacle = false;
        return g;
    }

    static Geometry unit_square() { return channel_only({0.0, 0.0}, {1.0, 1.0}); }

    double channel_area() const {
        return (channel_max.x - channel_min.x) * (channel_max.y - channel_min.y);
    }
    double obstacle_area() const {
        if (!has_obstacle) return 0.0;
        return (obstacle_max.x - obstacle_min.x) * (obstacle_max.y - obstacle_min.y);
    }
    double area() const { return channel_area() - obstacle_area(); }

    void validate() const {
        if (!(channel_min.x < channel_max.x) || !(channel_min.y < channel_max.y))
            throw Error("degenerate geometry: channel box has non-positive extent");
        if (!has_obstacle) return;
        if (!(obstacle_min.x < obstacle_max.x) || !(obstacle_min.y < obstacle_max.y))
            throw Error("degenerate geometry: obstacle box has non-positive extent");
        if (!(channel_min.x < obstacle_min.x && obstacle_max.x < channel_max.x &&
              channel_min.y < obstacle_min.y && obstacle_max.y < channel_max.y))
            throw Error("degenerate geometry: obstacle must lie strictly inside the channel");
    }
};

}  // namespace blm
