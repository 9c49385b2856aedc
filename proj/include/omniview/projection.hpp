#pragma once

#include "omniview/image.hpp"
#include "omniview/sphere_geom.hpp"
#include "omniview/viewport.hpp"

#include <functional>
#include <span>
#include <vector>

namespace omni {

struct ViewportImage {
    Viewport viewport;
    Image image;
};

/// Bilinear sample of an equirectangular image; x wraps across the seam,
/// y clamps at the top and bottom rows.
Pixel sample_bilinear(const EquirectImage& img, EquirectCoord c);

/// Bilinear sample of a planar image with both axes clamped.
Pixel sample_bilinear_clamped(const Image& img, double x, double y);

/// Continuous viewport-raster position of a tangent-plane coordinate, and back.
struct RasterPos {
    double x;
    double y;
};
RasterPos viewport_to_raster(ViewportCoord c, int size);
ViewportCoord raster_to_viewport(RasterPos p, int size);

/// Rectilinear rendering of one viewport. Each output pixel center goes
/// through gnomonic_inverse, dir_to_equirect and sample_bilinear.
ViewportImage render_viewport(const EquirectImage& img, const Viewport& vp);

/// Renders every viewport using up to `jobs` worker threads. Output order
/// follows the input order.
std::vector<ViewportImage> render_viewports(const EquirectImage& img, std::span<const Viewport> viewports,
                                            int jobs = 1);

using BlendKernel = std::function<double(ViewportCoord)>;

/// Separable tent (1 - |u|)(1 - |v|); zero on the viewport border.
double tent_weight(ViewportCoord c);

inline constexpr double kBlendEpsilon = 1e-8;

struct BlendResult {
    EquirectImage image;
    long fallback_count = 0;
};

// Accumulator and weight rasters for back-projecting viewport images into
// equirectangular space. Accumulation gathers per destination pixel.
class BlendAccumulator {
public:
    BlendAccumulator(int width, int height, int channels, BlendKernel kernel = tent_weight);

    /// Adds weight * value and weight for every equirect pixel strictly inside
    /// the viewport footprint. Throws std::domain_error on a channel mismatch.
    void accumulate(const ViewportImage& vimg);

    /// accum / weight where weight > kBlendEpsilon, fallback elsewhere.
    [[nodiscard]] BlendResult finalize(const Pixel& fallback = {}) const;

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] int channels() const { return channels_; }
    [[nodiscard]] std::span<const float> accum() const { return accum_; }
    [[nodiscard]] std::span<const float> weight() const { return weight_; }

private:
    int width_;
    int height_;
    int channels_;
    BlendKernel kernel_;
    std::vector<float> accum_;
    std::vector<float> weight_;
    std::vector<SinCos> row_trig_;
    std::vector<SinCos> col_trig_;
};

void backproject_accumulate(BlendAccumulator& acc, const ViewportImage& vimg);
BlendResult finalize_blend(const BlendAccumulator& acc, const Pixel& fallback = {});

/// Resizes to the detector input size. The target must keep a 2:1 aspect;
/// axes that shrink use exact area averaging, axes that grow use bilinear
/// interpolation (cyclic in x). Same size returns an identical copy.
EquirectImage prepare_detector_input(const EquirectImage& img, int target_width, int target_height);

/// Peak signal-to-noise ratio for [0, 1] data; infinity for identical images.
double psnr(const Image& a, const Image& b);

}  // namespace omni
