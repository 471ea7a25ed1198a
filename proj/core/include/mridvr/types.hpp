#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace mridvr {

struct Vec3 {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;

    constexpr float operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    constexpr float& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
};

constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3 operator*(Vec3 a, float s) { return {a.x * s, a.y * s, a.z * s}; }
constexpr Vec3 operator*(float s, Vec3 a) { return a * s; }
constexpr float dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline float length(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(Vec3 a) {
    const float len = length(a);
    return {a.x / len, a.y / len, a.z / len};
}

struct Rgb {
    float r = 0.0f;
    float g = 0.0f;
    float b = 0.0f;

    friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

// Voxel counts per axis, x fastest.
struct Dims {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t z = 0;

    constexpr std::size_t voxel_count() const {
        return static_cast<std::size_t>(x) * static_cast<std::size_t>(y) * static_cast<std::size_t>(z);
    }
    constexpr std::int32_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

// Millimetres per voxel along each axis.
struct Spacing {
    float x = 1.0f;
    float y = 1.0f;
    float z = 1.0f;

    constexpr float operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    friend constexpr bool operator==(const Spacing&, const Spacing&) = default;
};

constexpr std::size_t linear_index(const Dims& d, std::int32_t i, std::int32_t j, std::int32_t k) {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(d.y) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(d.x) +
           static_cast<std::size_t>(i);
}

} // namespace mridvr
