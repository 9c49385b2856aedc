#pragma once

#include "omniview/image.hpp"

#include <optional>
#include <vector>

namespace omni {

inline constexpr double kDefaultGradThreshold = 0.04;
inline constexpr double kDefaultStretchMax = 100.0;

// Per-row horizontal stretch of the equirectangular projection, 1/cos(lat),
// capped at stretch_max.
struct DistortionMap {
    int height = 0;
    double stretch_max = kDefaultStretchMax;
    std::vector<double> stretch;
};

/// Throws std::domain_error for h < 1 or stretch_max <= 1.
DistortionMap compute_distortion_map(int height, double stretch_max = kDefaultStretchMax);

struct EdgeLocation {
    int row;
    int col;

    friend bool operator==(const EdgeLocation&, const EdgeLocation&) = default;
};

struct EdgeSample {
    int row;
    int col;
    double width;
    double compensated_width;
};

/// Horizontal Sobel response, normalized to the mean slope per pixel, with
/// cyclic x and clamped y.
double horizontal_gradient(const Image& lum, int row, int col);

/// Pixels whose |gradient| exceeds the threshold and is a local maximum along
/// the row. A plateau of equal responses reports its rightmost pixel.
/// RGB input is converted to luma first.
std::vector<EdgeLocation> detect_vertical_edges(const Image& img, double grad_threshold = kDefaultGradThreshold);

/// Distance between the luminance extrema on either side of an edge pixel,
/// walking the row cyclically. nullopt when a walk exceeds width/4 steps or
/// the row is flat at the pixel.
std::optional<double> measure_edge_width(const Image& img, int row, int col);

enum class BlurStatistic { mean, median };

struct BlurOptions {
    double grad_threshold = kDefaultGradThreshold;
    double stretch_max = kDefaultStretchMax;
    bool compensate = true;
    BlurStatistic statistic = BlurStatistic::mean;
};

struct RowBlurSummary {
    int edge_count = 0;
    double mean_width = 0.0;
    double mean_compensated_width = 0.0;
};

struct BlurReport {
    long edge_count = 0;
    long discarded_count = 0;
    // Statistic of compensated widths (raw widths when compensation is off);
    // absent when no edge was accepted.
    std::optional<double> global_blur;
    std::optional<double> mean_uncompensated_width;
    std::vector<RowBlurSummary> rows;
    std::vector<EdgeSample> samples;
};

BlurReport global_blur(const Image& img, const BlurOptions& options = {});

}  // namespace omni
