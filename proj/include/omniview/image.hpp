#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace omni {

inline constexpr int kMaxChannels = 3;
using Pixel = std::array<float, kMaxChannels>;

// Row-major float raster with 1 or 3 interleaved channels, values in [0, 1].
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);
    Image(int width, int height, int channels, std::vector<float> pixels);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] int channels() const { return channels_; }
    [[nodiscard]] bool empty() const { return pixels_.empty(); }

    [[nodiscard]] float at(int x, int y, int c = 0) const { return pixels_[offset(x, y) + static_cast<std::size_t>(c)]; }
    float& at(int x, int y, int c = 0) { return pixels_[offset(x, y) + static_cast<std::size_t>(c)]; }

    [[nodiscard]] Pixel pixel(int x, int y) const;
    void set_pixel(int x, int y, const Pixel& p);

    [[nodiscard]] std::span<const float> data() const { return pixels_; }
    [[nodiscard]] std::span<float> data() { return pixels_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    [[nodiscard]] std::size_t offset(int x, int y) const
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> pixels_;
};

// An equirectangular frame: column 0 is adjacent to column width-1.
using EquirectImage = Image;

/// Rec. 601 luma of an RGB image; single-channel images are copied.
Image to_luminance(const Image& img);

}  // namespace omni
