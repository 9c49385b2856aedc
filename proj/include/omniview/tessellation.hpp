#pragma once

#include "omniview/sphere_geom.hpp"
#include "omniview/viewport.hpp"

#include <vector>

namespace omni {

// 360 * (1 - 1/golden ratio), i.e. 180 * (3 - sqrt(5)).
inline constexpr double kGoldenAngleDeg = 137.50776405003785;

inline constexpr int kDefaultViewportCount = 240;
inline constexpr double kDefaultFovDeg = 24.0;

/// Golden-angle spiral: z_k = 1 - (2k+1)/n, lat_k = asin(z_k),
/// lon_k = k * golden angle. Throws std::domain_error for n < 1.
std::vector<SphereDir> vogel_points(int n);

/// Viewport raster size matching the source pixel density at the viewport
/// center: round(fov * source_width / 360), at least 2.
int matched_viewport_size(double fov, int source_width);

// Immutable set of overlapping square viewports covering the sphere.
class Tessellation {
public:
    Tessellation(std::vector<Viewport> viewports, double fov);

    [[nodiscard]] const std::vector<Viewport>& viewports() const { return viewports_; }
    [[nodiscard]] int count() const { return static_cast<int>(viewports_.size()); }
    [[nodiscard]] double fov() const { return fov_; }
    [[nodiscard]] int size() const { return viewports_.front().size; }
    [[nodiscard]] const Viewport& operator[](int i) const { return viewports_.at(static_cast<std::size_t>(i)); }

    friend bool operator==(const Tessellation&, const Tessellation&) = default;

private:
    std::vector<Viewport> viewports_;
    double fov_;
};

Tessellation make_tessellation(int count, double fov, int size);

/// True when d lies strictly inside the square footprint (|u| < 1, |v| < 1).
bool strictly_contains(const GnomonicFrame& frame, const UnitVec3& d);
bool strictly_contains(const Viewport& vp, SphereDir d);

/// Ascending indices of the viewports strictly containing d.
std::vector<int> viewports_containing(const Tessellation& t, SphereDir d);

/// Fraction of vogel_points(samples) lying strictly inside at least one viewport.
double coverage_fraction(const Tessellation& t, int samples);

/// Angular radius of the circle circumscribing a square footprint.
double footprint_radius_deg(double fov);

// Per-pixel overlap of a tessellation rendered onto a width x height equirect grid.
struct CoverageMap {
    int width = 0;
    int height = 0;
    std::vector<int> overlap;   // containing viewports per pixel, row-major
    std::vector<bool> outline;  // inside some footprint with a 4-neighbour outside it
    int min_overlap = 0;
    int max_overlap = 0;
};

CoverageMap compute_coverage_map(const Tessellation& t, int width, int height);

}  // namespace omni
