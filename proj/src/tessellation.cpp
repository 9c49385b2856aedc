#include "omniview/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace omni {

void validate(const Viewport& vp)
{
    if (!(vp.fov > 0.0 && vp.fov < 90.0)) {
        throw std::domain_error("viewport fov " + std::to_string(vp.fov) + " outside (0, 90)");
    }
    if (vp.size < 2) {
        throw std::domain_error("viewport size must be at least 2");
    }
    if (!(vp.center.lon >= -180.0 && vp.center.lon < 180.0 && std::abs(vp.center.lat) <= 90.0)) {
        throw std::domain_error("viewport center is not a normalized direction");
    }
}

std::vector<SphereDir> vogel_points(int n)
{
    if (n < 1) {
        throw std::domain_error("vogel_points needs n >= 1");
    }
    std::vector<SphereDir> points;
    points.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / n;
        const double lat = rad_to_deg(std::asin(z));
        points.push_back(normalize_dir(k * kGoldenAngleDeg, lat));
    }
    return points;
}

int matched_viewport_size(double fov, int source_width)
{
    return std::max(2, static_cast<int>(std::lround(fov * source_width / 360.0)));
}

Tessellation::Tessellation(std::vector<Viewport> viewports, double fov)
    : viewports_(std::move(viewports)), fov_(fov)
{
    if (viewports_.empty()) {
        throw std::domain_error("tessellation needs at least one viewport");
    }
    for (std::size_t i = 0; i < viewports_.size(); ++i) {
        const Viewport& vp = viewports_[i];
        validate(vp);
        if (vp.index != static_cast<int>(i)) {
            throw std::domain_error("viewport indices must be 0..count-1 in order");
        }
        if (vp.fov != fov_ || vp.size != viewports_.front().size) {
            throw std::domain_error("viewports of a tessellation share fov and size");
        }
    }
}

Tessellation make_tessellation(int count, double fov, int size)
{
    if (count < 1) {
        throw std::domain_error("viewport count must be at least 1");
    }
    std::vector<Viewport> viewports;
    viewports.reserve(static_cast<std::size_t>(count));
    int index = 0;
    for (const SphereDir& center : vogel_points(count)) {
        viewports.push_back(Viewport{center, fov, size, index++});
    }
    return Tessellation(std::move(viewports), fov);
}

bool strictly_contains(const GnomonicFrame& frame, const UnitVec3& d)
{
    const auto c = frame.to_plane(d);
    return c && std::abs(c->u) < 1.0 && std::abs(c->v) < 1.0;
}

bool strictly_contains(const Viewport& vp, SphereDir d)
{
    return strictly_contains(GnomonicFrame(vp), dir_to_vec(d));
}

double footprint_radius_deg(double fov)
{
    return rad_to_deg(std::atan(std::sqrt(2.0) * std::tan(deg_to_rad(fov * 0.5))));
}

std::vector<int> viewports_containing(const Tessellation& t, SphereDir d)
{
    const UnitVec3 p = dir_to_vec(d);
    std::vector<int> hits;
    for (const Viewport& vp : t.viewports()) {
        if (strictly_contains(GnomonicFrame(vp), p)) {
            hits.push_back(vp.index);
        }
    }
    return hits;
}

double coverage_fraction(const Tessellation& t, int samples)
{
    if (samples < 1) {
        throw std::domain_error("coverage_fraction needs at least one sample");
    }
    std::vector<GnomonicFrame> frames;
    frames.reserve(t.viewports().size());
    for (const Viewport& vp : t.viewports()) {
        frames.emplace_back(vp);
    }
    // Anything inside the footprint is within its circumscribed cap.
    const double min_cos = std::cos(deg_to_rad(footprint_radius_deg(t.fov()))) - 1e-9;

    long covered = 0;
    for (const SphereDir& s : vogel_points(samples)) {
        const UnitVec3 p = dir_to_vec(s);
        for (const GnomonicFrame& f : frames) {
            const UnitVec3& c = f.forward();
            if (p.x * c.x + p.y * c.y + p.z * c.z < min_cos) {
                continue;
            }
            if (strictly_contains(f, p)) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / samples;
}

}  // namespace omni

namespace omni {

CoverageMap compute_coverage_map(const Tessellation& t, int width, int height)
{
    if (width < 2 || height < 1) {
        throw std::domain_error("coverage map needs width >= 2 and height >= 1");
    }
    const auto w = static_cast<std::size_t>(width);
    const auto h = static_cast<std::size_t>(height);
    CoverageMap map{width, height, std::vector<int>(w * h, 0), std::vector<bool>(w * h, false), 0, 0};

    std::vector<SinCos> row_trig;
    for (int y = 0; y < height; ++y) {
        row_trig.push_back(sincos_deg(equirect_to_dir({0.5, y + 0.5}, width, height).lat));
    }
    std::vector<SinCos> col_trig;
    for (int x = 0; x < width; ++x) {
        col_trig.push_back(sincos_deg(equirect_to_dir({x + 0.5, 0.5}, width, height).lon));
    }

    const double min_cos = std::cos(deg_to_rad(footprint_radius_deg(t.fov()))) - 1e-9;
    std::vector<bool> inside(w * h);
    for (const Viewport& vp : t.viewports()) {
        const GnomonicFrame frame(vp);
        const UnitVec3& f = frame.forward();
        std::fill(inside.begin(), inside.end(), false);
        for (std::size_t y = 0; y < h; ++y) {
            const SinCos lat = row_trig[y];
            if (lat.cos * std::sqrt(f.x * f.x + f.y * f.y) + std::abs(lat.sin * f.z) < min_cos) {
                continue;  // no pixel of this row can reach the footprint
            }
            for (std::size_t x = 0; x < w; ++x) {
                const SinCos lon = col_trig[x];
                const UnitVec3 p{lat.cos * lon.cos, lat.cos * lon.sin, lat.sin};
                if (p.x * f.x + p.y * f.y + p.z * f.z >= min_cos && strictly_contains(frame, p)) {
                    inside[y * w + x] = true;
                    ++map.overlap[y * w + x];
                }
            }
        }
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                if (!inside[y * w + x]) {
                    continue;
                }
                const bool edge = !inside[y * w + (x + 1) % w] || !inside[y * w + (x + w - 1) % w] ||
                                  (y > 0 && !inside[(y - 1) * w + x]) || (y + 1 < h && !inside[(y + 1) * w + x]);
                if (edge) {
                    map.outline[y * w + x] = true;
                }
            }
        }
    }
    const auto [lo, hi] = std::minmax_element(map.overlap.begin(), map.overlap.end());
    map.min_overlap = *lo;
    map.max_overlap = *hi;
    return map;
}

}  // namespace omni
