#include "omniview/sphere_geom.hpp"

#include "omniview/viewport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace omni {
namespace {

double dot(const UnitVec3& a, const UnitVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

UnitVec3 normalized(double x, double y, double z)
{
    const double n = std::sqrt(x * x + y * y + z * z);
    return {x / n, y / n, z / n};
}

}  // namespace

SinCos sincos_deg(double deg)
{
    // Reduce to [-45, 45] so quadrant angles come out exact.
    const double r = std::fmod(deg, 360.0);
    const double q = std::nearbyint(r / 90.0);
    const double rem = deg_to_rad(r - 90.0 * q);
    const double s = std::sin(rem);
    const double c = std::cos(rem);
    switch ((static_cast<int>(q) % 4 + 4) % 4) {
    case 0:
        return {s, c};
    case 1:
        return {c, -s};
    case 2:
        return {-s, -c};
    default:
        return {-c, s};
    }
}

SphereDir normalize_dir(double lon, double lat)
{
    if (!std::isfinite(lon) || !std::isfinite(lat)) {
        throw std::domain_error("direction must be finite");
    }
    if (std::abs(lat) > 90.0) {
        throw std::domain_error("latitude " + std::to_string(lat) + " outside [-90, 90]");
    }
    // fmod and both corrections are exact in binary floating point.
    double r = std::fmod(lon, 360.0);
    if (r >= 180.0) {
        r -= 360.0;
    } else if (r < -180.0) {
        r += 360.0;
    }
    return {r + 0.0, lat + 0.0};
}

UnitVec3 dir_to_vec(SphereDir d)
{
    const SinCos lon = sincos_deg(d.lon);
    const SinCos lat = sincos_deg(d.lat);
    return {lat.cos * lon.cos, lat.cos * lon.sin, lat.sin};
}

SphereDir vec_to_dir(UnitVec3 v)
{
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
        throw std::domain_error("vector must be finite");
    }
    const double rxy = std::hypot(v.x, v.y);
    if (rxy == 0.0 && v.z == 0.0) {
        throw std::domain_error("zero vector has no direction");
    }
    const double lat = std::clamp(rad_to_deg(std::atan2(v.z, rxy)), -90.0, 90.0);
    const double lon = rxy == 0.0 ? 0.0 : rad_to_deg(std::atan2(v.y, v.x));
    return normalize_dir(lon, lat);
}

SphereDir equirect_to_dir(EquirectCoord c, int width, int height)
{
    const double w = width;
    const double h = height;
    double x = c.x - w * std::floor(c.x / w);
    if (x >= w) {
        x = 0.0;
    }
    const double y = std::clamp(c.y, 0.0, h);
    const double lat = std::clamp(90.0 - y / h * 180.0, -90.0, 90.0);
    return normalize_dir(x / w * 360.0 - 180.0, lat);
}

EquirectCoord dir_to_equirect(SphereDir d, int width, int height)
{
    const double w = width;
    double x = (d.lon + 180.0) / 360.0 * w;
    if (x >= w) {
        x -= w;
    } else if (x < 0.0) {
        x += w;
    }
    if (x >= w) {
        x = 0.0;
    }
    return {x, (90.0 - d.lat) / 180.0 * height};
}

double angular_distance(SphereDir a, SphereDir b)
{
    const UnitVec3 p = dir_to_vec(a);
    const UnitVec3 q = dir_to_vec(b);
    const double cx = p.y * q.z - p.z * q.y;
    const double cy = p.z * q.x - p.x * q.z;
    const double cz = p.x * q.y - p.y * q.x;
    return rad_to_deg(std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot(p, q)));
}

GnomonicFrame::GnomonicFrame(const Viewport& vp) : GnomonicFrame(vp.center, vp.fov) {}

GnomonicFrame::GnomonicFrame(SphereDir center, double fov_deg)
{
    const double lon_deg = std::abs(center.lat) == 90.0 ? 0.0 : center.lon;
    const SinCos lon = sincos_deg(lon_deg);
    const SinCos lat = sincos_deg(center.lat);
    forward_ = {lat.cos * lon.cos, lat.cos * lon.sin, lat.sin};
    east_ = {-lon.sin, lon.cos, 0.0};
    north_ = {-lat.sin * lon.cos, -lat.sin * lon.sin, lat.cos};
    half_tan_ = std::tan(deg_to_rad(fov_deg * 0.5));
}

std::optional<ViewportCoord> GnomonicFrame::to_plane(const UnitVec3& p) const
{
    const double depth = dot(p, forward_);
    if (!(depth > 0.0)) {
        return std::nullopt;
    }
    const double scale = 1.0 / (depth * half_tan_);
    return ViewportCoord{dot(p, east_) * scale, dot(p, north_) * scale};
}

UnitVec3 GnomonicFrame::from_plane(ViewportCoord c) const
{
    const double a = c.u * half_tan_;
    const double b = c.v * half_tan_;
    return normalized(forward_.x + a * east_.x + b * north_.x,
                      forward_.y + a * east_.y + b * north_.y,
                      forward_.z + a * east_.z + b * north_.z);
}

std::optional<ViewportCoord> gnomonic_forward(SphereDir d, const Viewport& vp)
{
    const auto c = GnomonicFrame(vp).to_plane(dir_to_vec(d));
    if (!c || std::abs(c->u) > 1.0 + kBorderTolerance || std::abs(c->v) > 1.0 + kBorderTolerance) {
        return std::nullopt;
    }
    return c;
}

SphereDir gnomonic_inverse(ViewportCoord c, const Viewport& vp)
{
    return vec_to_dir(GnomonicFrame(vp).from_plane(c));
}

}  // namespace omni
