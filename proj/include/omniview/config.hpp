#pragma once

#include "omniview/blur_metric.hpp"
#include "omniview/fusion.hpp"
#include "omniview/tessellation.hpp"

#include <filesystem>
#include <string>

namespace omni {

// Settings shared by the CLI commands. Loaded from an optional JSON file:
//   {"tessellation": {"count", "fov", "size"},
//    "fusion": {"iou_threshold", "merge"},
//    "blur": {"grad_threshold", "stretch_max", "compensate", "statistic"},
//    "io": {"image", "tessellation", "viewport_dir", "detections", "output"},
//    "jobs": N}
// Every key is optional; unknown keys are rejected.
struct PipelineConfig {
    struct TessellationParams {
        int count = kDefaultViewportCount;
        double fov = kDefaultFovDeg;
        int size = 256;
    } tessellation;

    struct FusionParams {
        double iou_threshold = kDefaultIouThreshold;
        bool merge = false;
    } fusion;

    BlurOptions blur;

    struct IoPaths {
        std::string image;
        std::string tessellation;
        std::string viewport_dir;
        std::string detections;
        std::string output;
    } io;

    int jobs = 1;
};

/// Throws FormatError (see io.hpp) on malformed JSON, unknown keys or
/// out-of-domain values.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Throws std::domain_error when a parameter leaves its module's domain.
void validate(const PipelineConfig& config);

}  // namespace omni
