#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace blm {

// Base error type for everything the library rejects at runtime.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text-format/config errors carrying the offending line.
struct ParseError : Error {
    ParseError(const std::string& what, int line)
        : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    int line;
};

// A state coefficient went NaN/Inf.
struct BlowupError : Error {
    BlowupError(const std::string& what, int step)
        : Error(what + " at step " + std::to_string(step)), step(step) {}
    int step;
};

// Nonlinear iteration failed to reach tolerance.
struct PicardError : Error {
    PicardError(int iters, double last_increment, int step)
        : Error("Picard iteration did not converge after " + std::to_string(iters) +
                " iterations at step " + std::to_string(step) + ", last increment " +
                std::to_string(last_increment)),
          iterations(iters), last_increment(last_increment), step(step) {}
    int iterations;
    double last_increment;
    int step;
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
// z-component of the 2D cross product
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// All floating-point text output uses 17 significant digits so that
// write/read round-trips reproduce the double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double sq(double v) { return v * v; }

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace blm
