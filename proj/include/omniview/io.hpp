#pragma once

#include "omniview/fusion.hpp"
#include "omniview/image.hpp"
#include "omniview/tessellation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace omni {

// File missing, unreadable or unwritable.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File readable but its content violates the format.
class FormatError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr int kTessellationFormatVersion = 1;

/// 8-bit PNG, grayscale or RGB; alpha is dropped. Values map linearly to [0, 1].
Image read_png(const std::filesystem::path& path);

/// Writes 8-bit PNG with round-half-up quantization of clamped values.
void write_png(const std::filesystem::path& path, const Image& img);

/// Round-half-up 8-bit quantization used by write_png.
std::uint8_t quantize_u8(float v);

/// Tessellation document:
///   {"format": "omniview-tessellation", "version": 1, "count": N, "fov": F,
///    "size": S, "viewports": [{"index": 0, "lon": ..., "lat": ...}, ...]}
std::string format_tessellation(const Tessellation& t);
Tessellation parse_tessellation(const std::string& text);
void write_tessellation(const std::filesystem::path& path, const Tessellation& t);
Tessellation read_tessellation(const std::filesystem::path& path);

/// JSON-lines detection lists, one object per line:
///   {"class_id": 0, "score": 0.9, "x": ..., "y": ..., "bw": ..., "bh": ...}
/// Viewport detections carry a leading "viewport_index". Blank lines are skipped.
std::string format_detections(const std::vector<Detection>& dets);
std::vector<Detection> parse_detections(std::istream& in);
std::string format_viewport_detections(const std::vector<ViewportDetection>& dets);
std::vector<ViewportDetection> parse_viewport_detections(std::istream& in);

std::vector<Detection> read_detections(const std::filesystem::path& path);
std::vector<ViewportDetection> read_viewport_detections(const std::filesystem::path& path);

/// Whole-file helpers; write_text_file replaces the target atomically.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Name of the i-th viewport image, zero padded to at least 4 digits.
std::string viewport_file_name(int index, int count);

}  // namespace omni
