#pragma once

#include <optional>

namespace omni {

// Direction on the viewing sphere. lon in [-180, 180), lat in [-90, 90], degrees.
struct SphereDir {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const SphereDir&, const SphereDir&) = default;
};

struct UnitVec3 {
    double x = 1.0;
    double y = 0.0;
    double z = 0.0;
};

// Continuous equirectangular pixel coordinate. Integer pixel p covers [p, p+1)
// and samples at p + 0.5. x is cyclic with period w; y is clamped to [0, h].
struct EquirectCoord {
    double x = 0.0;
    double y = 0.0;
};

// Normalized tangent-plane coordinate of a viewport; the viewport border lies
// at |u| = 1 or |v| = 1. u grows eastwards, v grows northwards.
struct ViewportCoord {
    double u = 0.0;
    double v = 0.0;
};

struct Viewport;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// sin and cos of an angle in degrees. Exact at multiples of 90 degrees.
struct SinCos {
    double sin;
    double cos;
};
SinCos sincos_deg(double deg);

/// Reduces lon into [-180, 180). Throws std::domain_error when |lat| > 90
/// or either argument is not finite.
SphereDir normalize_dir(double lon, double lat);

UnitVec3 dir_to_vec(SphereDir d);

/// Inverse of dir_to_vec. The input is renormalized; at the poles lon is 0.
/// Throws std::domain_error on a zero or non-finite vector.
SphereDir vec_to_dir(UnitVec3 v);

SphereDir equirect_to_dir(EquirectCoord c, int width, int height);
EquirectCoord dir_to_equirect(SphereDir d, int width, int height);

/// Great-circle angle in degrees, in [0, 180].
double angular_distance(SphereDir a, SphereDir b);

/// Tangent-plane basis of a viewport: forward points at the center, east and
/// north span the image plane. At a pole the frame is built as if lon were 0,
/// so "up" lies in the lon 0 / 180 meridian plane.
class GnomonicFrame {
public:
    explicit GnomonicFrame(const Viewport& vp);
    GnomonicFrame(SphereDir center, double fov_deg);

    /// Plane coordinates without the border test; nullopt when the direction
    /// is 90 degrees or more from the center.
    [[nodiscard]] std::optional<ViewportCoord> to_plane(const UnitVec3& p) const;
    [[nodiscard]] UnitVec3 from_plane(ViewportCoord c) const;

    [[nodiscard]] const UnitVec3& forward() const { return forward_; }
    [[nodiscard]] const UnitVec3& east() const { return east_; }
    [[nodiscard]] const UnitVec3& north() const { return north_; }
    [[nodiscard]] double half_tan() const { return half_tan_; }

private:
    UnitVec3 forward_;
    UnitVec3 east_;
    UnitVec3 north_;
    double half_tan_;
};

// Points on the border (|u| == 1 up to rounding) still count as inside.
inline constexpr double kBorderTolerance = 1e-12;

/// Central projection onto the viewport's tangent plane. Returns nullopt
/// outside the square footprint or at >= 90 degrees from the center.
std::optional<ViewportCoord> gnomonic_forward(SphereDir d, const Viewport& vp);

/// Defined on the whole tangent plane, including outside [-1, 1]^2.
SphereDir gnomonic_inverse(ViewportCoord c, const Viewport& vp);

}  // namespace omni
