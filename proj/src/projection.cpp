#include "omniview/projection.hpp"

#include "omniview/tessellation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace omni {
namespace {

int wrap(int i, int n)
{
    const int r = i % n;
    return r < 0 ? r + n : r;
}

Pixel lerp4(const Image& img, int x0, int x1, int y0, int y1, double tx, double ty)
{
    Pixel out{};
    for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - tx) + img.at(x1, y0, c) * tx;
        const double bottom = img.at(x0, y1, c) * (1.0 - tx) + img.at(x1, y1, c) * tx;
        out[static_cast<std::size_t>(c)] = static_cast<float>(top * (1.0 - ty) + bottom * ty);
    }
    return out;
}

struct AxisTap {
    int index;
    double weight;
};
using AxisTaps = std::vector<std::vector<AxisTap>>;

AxisTaps box_taps(int n_in, int n_out)
{
    AxisTaps taps(static_cast<std::size_t>(n_out));
    const double scale = static_cast<double>(n_in) / n_out;
    for (int i = 0; i < n_out; ++i) {
        const double a = i * scale;
        const double b = (i + 1) * scale;
        double total = 0.0;
        auto& t = taps[static_cast<std::size_t>(i)];
        for (int j = static_cast<int>(std::floor(a)); j < std::min(n_in, static_cast<int>(std::ceil(b))); ++j) {
            const double overlap = std::min(b, j + 1.0) - std::max(a, static_cast<double>(j));
            if (overlap > 0.0) {
                t.push_back({j, overlap});
                total += overlap;
            }
        }
        for (AxisTap& tap : t) {
            tap.weight /= total;
        }
    }
    return taps;
}

AxisTaps linear_taps(int n_in, int n_out, bool cyclic)
{
    AxisTaps taps(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
        const double pos = (i + 0.5) * n_in / n_out - 0.5;
        const double f = std::floor(pos);
        const double t = pos - f;
        int j0 = static_cast<int>(f);
        int j1 = j0 + 1;
        if (cyclic) {
            j0 = wrap(j0, n_in);
            j1 = wrap(j1, n_in);
        } else {
            j0 = std::clamp(j0, 0, n_in - 1);
            j1 = std::clamp(j1, 0, n_in - 1);
        }
        taps[static_cast<std::size_t>(i)] = {{j0, 1.0 - t}, {j1, t}};
    }
    return taps;
}

AxisTaps axis_taps(int n_in, int n_out, bool cyclic)
{
    if (n_in == n_out) {
        AxisTaps taps(static_cast<std::size_t>(n_out));
        for (int i = 0; i < n_out; ++i) {
            taps[static_cast<std::size_t>(i)] = {{i, 1.0}};
        }
        return taps;
    }
    return n_out < n_in ? box_taps(n_in, n_out) : linear_taps(n_in, n_out, cyclic);
}

}  // namespace

Pixel sample_bilinear(const EquirectImage& img, EquirectCoord c)
{
    const double fx = c.x - 0.5;
    const double fy = std::clamp(c.y, 0.0, static_cast<double>(img.height())) - 0.5;
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const int w = img.width();
    const int x0 = wrap(static_cast<int>(std::fmod(x0f, static_cast<double>(w))), w);
    const int x1 = x0 + 1 == w ? 0 : x0 + 1;
    const int y0 = std::clamp(static_cast<int>(y0f), 0, img.height() - 1);
    const int y1 = std::clamp(static_cast<int>(y0f) + 1, 0, img.height() - 1);
    return lerp4(img, x0, x1, y0, y1, fx - x0f, fy - y0f);
}

Pixel sample_bilinear_clamped(const Image& img, double x, double y)
{
    const double fx = std::clamp(x, 0.0, static_cast<double>(img.width())) - 0.5;
    const double fy = std::clamp(y, 0.0, static_cast<double>(img.height())) - 0.5;
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const int x0 = std::clamp(static_cast<int>(x0f), 0, img.width() - 1);
    const int x1 = std::clamp(static_cast<int>(x0f) + 1, 0, img.width() - 1);
    const int y0 = std::clamp(static_cast<int>(y0f), 0, img.height() - 1);
    const int y1 = std::clamp(static_cast<int>(y0f) + 1, 0, img.height() - 1);
    return lerp4(img, x0, x1, y0, y1, fx - x0f, fy - y0f);
}

RasterPos viewport_to_raster(ViewportCoord c, int size)
{
    return {(c.u + 1.0) * 0.5 * size, (1.0 - c.v) * 0.5 * size};
}

ViewportCoord raster_to_viewport(RasterPos p, int size)
{
    return {2.0 * p.x / size - 1.0, 1.0 - 2.0 * p.y / size};
}

ViewportImage render_viewport(const EquirectImage& img, const Viewport& vp)
{
    validate(vp);
    const GnomonicFrame frame(vp);
    Image out(vp.size, vp.size, img.channels());
    for (int row = 0; row < vp.size; ++row) {
        for (int col = 0; col < vp.size; ++col) {
            const ViewportCoord c = raster_to_viewport({col + 0.5, row + 0.5}, vp.size);
            const SphereDir d = vec_to_dir(frame.from_plane(c));
            out.set_pixel(col, row, sample_bilinear(img, dir_to_equirect(d, img.width(), img.height())));
        }
    }
    return {vp, std::move(out)};
}

std::vector<ViewportImage> render_viewports(const EquirectImage& img, std::span<const Viewport> viewports,
                                            int jobs)
{
    std::vector<ViewportImage> out(viewports.size());
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || viewports.size() < 2) {
        for (std::size_t i = 0; i < viewports.size(); ++i) {
            out[i] = render_viewport(img, viewports[i]);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(workers, viewports.size()); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < viewports.size(); i = next++) {
                    try {
                        out[i] = render_viewport(img, viewports[i]);
                    } catch (...) {
                        if (!failed.exchange(true)) {
                            failure = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

double tent_weight(ViewportCoord c)
{
    return (1.0 - std::abs(c.u)) * (1.0 - std::abs(c.v));
}

BlendAccumulator::BlendAccumulator(int width, int height, int channels, BlendKernel kernel)
    : width_(width), height_(height), channels_(channels), kernel_(std::move(kernel))
{
    if (width < 2 || height < 1) {
        throw std::domain_error("equirect accumulator needs width >= 2 and height >= 1");
    }
    if (channels != 1 && channels != 3) {
        throw std::domain_error("accumulator has 1 or 3 channels");
    }
    const auto pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    accum_.assign(pixels * static_cast<std::size_t>(channels), 0.0f);
    weight_.assign(pixels, 0.0f);
    row_trig_.reserve(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        row_trig_.push_back(sincos_deg(equirect_to_dir({0.5, y + 0.5}, width, height).lat));
    }
    col_trig_.reserve(static_cast<std::size_t>(width));
    for (int x = 0; x < width; ++x) {
        col_trig_.push_back(sincos_deg(equirect_to_dir({x + 0.5, 0.5}, width, height).lon));
    }
}

void BlendAccumulator::accumulate(const ViewportImage& vimg)
{
    if (vimg.image.channels() != channels_) {
        throw std::domain_error("viewport image channel count does not match the accumulator");
    }
    if (vimg.image.width() != vimg.viewport.size || vimg.image.height() != vimg.viewport.size) {
        throw std::domain_error("viewport image raster does not match its viewport size");
    }
    validate(vimg.viewport);
    const GnomonicFrame frame(vimg.viewport);
    const UnitVec3& fwd = frame.forward();
    const double radius = footprint_radius_deg(vimg.viewport.fov);
    const double min_cos = std::cos(deg_to_rad(radius)) - 1e-9;

    // Rows whose latitude can reach the footprint, with a one-row margin.
    const double pitch = 180.0 / height_;
    const double lat_hi = vimg.viewport.center.lat + radius + pitch;
    const double lat_lo = vimg.viewport.center.lat - radius - pitch;
    const int y_begin = std::max(0, static_cast<int>(std::floor((90.0 - lat_hi) / pitch)));
    const int y_end = std::min(height_, static_cast<int>(std::ceil((90.0 - lat_lo) / pitch)) + 1);

    const int size = vimg.viewport.size;
    const auto nc = static_cast<std::size_t>(channels_);
    for (int y = y_begin; y < y_end; ++y) {
        const SinCos lat = row_trig_[static_cast<std::size_t>(y)];
        for (int x = 0; x < width_; ++x) {
            const SinCos lon = col_trig_[static_cast<std::size_t>(x)];
            const UnitVec3 p{lat.cos * lon.cos, lat.cos * lon.sin, lat.sin};
            if (p.x * fwd.x + p.y * fwd.y + p.z * fwd.z < min_cos) {
                continue;
            }
            const auto c = frame.to_plane(p);
            if (!c || !(std::abs(c->u) < 1.0 && std::abs(c->v) < 1.0)) {
                continue;
            }
            const double w = kernel_(*c);
            if (!(w > 0.0)) {
                continue;
            }
            const RasterPos r = viewport_to_raster(*c, size);
            const Pixel value = sample_bilinear_clamped(vimg.image, r.x, r.y);
            const std::size_t idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                                    static_cast<std::size_t>(x);
            for (std::size_t ch = 0; ch < nc; ++ch) {
                accum_[idx * nc + ch] += static_cast<float>(w * value[ch]);
            }
            weight_[idx] += static_cast<float>(w);
        }
    }
}

BlendResult BlendAccumulator::finalize(const Pixel& fallback) const
{
    BlendResult result{Image(width_, height_, channels_), 0};
    const auto nc = static_cast<std::size_t>(channels_);
    std::span<float> out = result.image.data();
    for (std::size_t i = 0; i < weight_.size(); ++i) {
        const float w = weight_[i];
        if (w > kBlendEpsilon) {
            for (std::size_t ch = 0; ch < nc; ++ch) {
                out[i * nc + ch] = accum_[i * nc + ch] / w;
            }
        } else {
            for (std::size_t ch = 0; ch < nc; ++ch) {
                out[i * nc + ch] = fallback[ch];
            }
            ++result.fallback_count;
        }
    }
    return result;
}

void backproject_accumulate(BlendAccumulator& acc, const ViewportImage& vimg)
{
    acc.accumulate(vimg);
}

BlendResult finalize_blend(const BlendAccumulator& acc, const Pixel& fallback)
{
    return acc.finalize(fallback);
}

EquirectImage prepare_detector_input(const EquirectImage& img, int target_width, int target_height)
{
    if (target_width < 1 || target_height < 1) {
        throw std::domain_error("detector input size must be positive");
    }
    if (target_width != 2 * target_height) {
        throw std::domain_error("detector input must keep a 2:1 aspect ratio");
    }
    if (target_width == img.width() && target_height == img.height()) {
        return img;
    }
    const int nc = img.channels();
    const AxisTaps xt = axis_taps(img.width(), target_width, true);
    const AxisTaps yt = axis_taps(img.height(), target_height, false);

    std::vector<double> tmp(static_cast<std::size_t>(target_width) * static_cast<std::size_t>(img.height()) *
                            static_cast<std::size_t>(nc));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < target_width; ++x) {
            for (int c = 0; c < nc; ++c) {
                double sum = 0.0;
                for (const AxisTap& t : xt[static_cast<std::size_t>(x)]) {
                    sum += t.weight * img.at(t.index, y, c);
                }
                tmp[(static_cast<std::size_t>(y) * static_cast<std::size_t>(target_width) +
                     static_cast<std::size_t>(x)) * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)] = sum;
            }
        }
    }
    Image out(target_width, target_height, nc);
    for (int y = 0; y < target_height; ++y) {
        for (int x = 0; x < target_width; ++x) {
            for (int c = 0; c < nc; ++c) {
                double sum = 0.0;
                for (const AxisTap& t : yt[static_cast<std::size_t>(y)]) {
                    sum += t.weight * tmp[(static_cast<std::size_t>(t.index) * static_cast<std::size_t>(target_width) +
                                           static_cast<std::size_t>(x)) * static_cast<std::size_t>(nc) +
                                          static_cast<std::size_t>(c)];
                }
                out.at(x, y, c) = static_cast<float>(sum);
            }
        }
    }
    return out;
}

double psnr(const Image& a, const Image& b)
{
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
        throw std::domain_error("psnr needs images of equal shape");
    }
    double sse = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(da[i]) - db[i];
        sse += d * d;
    }
    if (sse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(static_cast<double>(da.size()) / sse);
}

}  // namespace omni
