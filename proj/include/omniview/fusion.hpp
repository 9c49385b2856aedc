#pragma once

#include "omniview/tessellation.hpp"

#include <vector>

namespace omni {

// Axis-aligned box in continuous equirect pixels. A box with x + bw > width
// wraps across the seam; y never wraps.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double bw = 0.0;
    double bh = 0.0;

    friend bool operator==(const Box&, const Box&) = default;
};

struct Detection {
    int class_id = 0;
    double score = 0.0;
    Box box;

    friend bool operator==(const Detection&, const Detection&) = default;
};

// Detector output on one viewport raster; box in viewport pixels.
struct ViewportDetection {
    int viewport_index = 0;
    int class_id = 0;
    double score = 0.0;
    Box box;

    friend bool operator==(const ViewportDetection&, const ViewportDetection&) = default;
};

/// Throws std::domain_error unless d obeys the seam-crossing box convention
/// for a width x height equirect image.
void validate(const Detection& d, int width, int height);

/// Lifts a viewport box to equirect space through 8 boundary samples
/// (corners and edge midpoints). Throws std::domain_error when the lifted box
/// spans 180 degrees of longitude or more.
Detection lift_detection(const ViewportDetection& vd, const Tessellation& t, int width, int height);

/// IoU with the x overlap measured on the circle of circumference `width`.
double cyclic_iou(const Box& a, const Box& b, int width);
double cyclic_iou(const Detection& a, const Detection& b, int width);

/// Textbook IoU with no wrap-around.
double planar_iou(const Box& a, const Box& b);

enum class NmsMode {
    discard,
    // Kept box becomes the score-weighted mean of itself and the boxes it suppressed.
    merge,
};

inline constexpr double kDefaultIouThreshold = 0.5;

/// Greedy per-class NMS with cyclic IoU. Ties in score break by class_id,
/// then by input order; the result is sorted the same way.
std::vector<Detection> spherical_nms(const std::vector<Detection>& dets, double iou_threshold, int width,
                                     NmsMode mode = NmsMode::discard);

/// Same greedy procedure with planar IoU; unaware of the seam.
std::vector<Detection> planar_nms(const std::vector<Detection>& dets, double iou_threshold);

/// Shifts every box by delta_lon * width / 360 modulo width.
std::vector<Detection> rotate_detections(const std::vector<Detection>& dets, double delta_lon, int width);

}  // namespace omni
