#pragma once

#include "omniview/sphere_geom.hpp"

namespace omni {

// One square rectilinear view of the sphere. fov is the full edge-to-edge
// angle along each axis through the center.
struct Viewport {
    SphereDir center;
    double fov = 24.0;
    int size = 256;
    int index = 0;

    friend bool operator==(const Viewport&, const Viewport&) = default;
};

/// Throws std::domain_error unless fov is in (0, 90) and size >= 2.
void validate(const Viewport& vp);

}  // namespace omni
