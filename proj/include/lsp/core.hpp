#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsp {

struct Cell {
    int x = 0;  // column
    int y = 0;  // row
    auto operator<=>(const Cell&) const = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double euclid(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Row-major 2D grid; (x, y) = (column, row).
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : w_(width), h_(height), cells_(static_cast<size_t>(width) * height, fill) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Grid: dimensions must be positive");
    }

    int width() const { return w_; }
    int height() const { return h_; }
    size_t size() const { return cells_.size(); }

    bool in_bounds(int x, int y) const {
        return static_cast<unsigned>(x) < static_cast<unsigned>(w_) &&
               static_cast<unsigned>(y) < static_cast<unsigned>(h_);
    }
    bool in_bounds(Cell c) const { return in_bounds(c.x, c.y); }

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * w_ + x; }
    size_t idx(Cell c) const { return idx(c.x, c.y); }

    T& at(int x, int y) { return cells_[idx(x, y)]; }
    const T& at(int x, int y) const { return cells_[idx(x, y)]; }
    T& at(Cell c) { return at(c.x, c.y); }
    const T& at(Cell c) const { return at(c.x, c.y); }

    T& operator[](size_t i) { return cells_[i]; }
    const T& operator[](size_t i) const { return cells_[i]; }

    void fill(T v) { std::fill(cells_.begin(), cells_.end(), v); }

    const std::vector<T>& data() const { return cells_; }
    std::vector<T>& data() { return cells_; }

    bool operator==(const Grid&) const = default;

private:
    int w_ = 0, h_ = 0;
    std::vector<T> cells_;
};

inline constexpr Cell kNeighbors4[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
inline constexpr Cell kNeighbors8[8] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                        {1, 1},  {-1, 1}, {1, -1}, {-1, -1}};

inline constexpr double kSqrt2 = 1.4142135623730951;

// Normalizes an integer heading to [0, 360).
inline int wrap_heading(int deg) {
    int h = deg % 360;
    return h < 0 ? h + 360 : h;
}

// Wraps an angular error to [-180, 180).
inline double wrap_angle(double deg) {
    double a = std::fmod(deg + 180.0, 360.0);
    if (a < 0) a += 360.0;
    return a - 180.0;
}

inline constexpr double kDegToRad = 0.017453292519943295;

// splitmix64: cheap deterministic stream for deriving per-item seeds from a root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t s = root ^ (0x632BE59BD9B4E019ull * (index + 1));
    return splitmix64(s);
}

inline std::uint64_t fnv1a64(const void* bytes, size_t n, std::uint64_t h = 0xCBF29CE484222325ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

}  // namespace lsp
