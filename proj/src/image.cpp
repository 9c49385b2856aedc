#include "omniview/image.hpp"

#include <stdexcept>

namespace omni {

Image::Image(int width, int height, int channels, float fill)
    : Image(width, height, channels,
            std::vector<float>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                   static_cast<std::size_t>(height > 0 ? height : 0) *
                                   static_cast<std::size_t>(channels > 0 ? channels : 0),
                               fill))
{
}

Image::Image(int width, int height, int channels, std::vector<float> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels))
{
    if (width < 1 || height < 1) {
        throw std::domain_error("image dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw std::domain_error("images have 1 or 3 channels");
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                              static_cast<std::size_t>(channels)) {
        throw std::domain_error("pixel buffer size does not match image dimensions");
    }
}

Pixel Image::pixel(int x, int y) const
{
    Pixel p{};
    const std::size_t o = offset(x, y);
    for (int c = 0; c < channels_; ++c) {
        p[static_cast<std::size_t>(c)] = pixels_[o + static_cast<std::size_t>(c)];
    }
    return p;
}

void Image::set_pixel(int x, int y, const Pixel& p)
{
    const std::size_t o = offset(x, y);
    for (int c = 0; c < channels_; ++c) {
        pixels_[o + static_cast<std::size_t>(c)] = p[static_cast<std::size_t>(c)];
    }
}

Image to_luminance(const Image& img)
{
    if (img.channels() == 1) {
        return img;
    }
    Image out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(x, y) = static_cast<float>(0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                              0.114 * img.at(x, y, 2));
        }
    }
    return out;
}

}  // namespace omni
