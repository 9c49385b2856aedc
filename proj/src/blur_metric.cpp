#include "omniview/blur_metric.hpp"

#include "omniview/sphere_geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omni {
namespace {

int wrap(int i, int n)
{
    const int r = i % n;
    return r < 0 ? r + n : r;
}

}  // namespace

DistortionMap compute_distortion_map(int height, double stretch_max)
{
    if (height < 1) {
        throw std::domain_error("distortion map needs height >= 1");
    }
    if (!(stretch_max > 1.0)) {
        throw std::domain_error("stretch_max must exceed 1");
    }
    DistortionMap map{height, stretch_max, {}};
    map.stretch.reserve(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        // Fold onto the northern half so mirrored rows get bit-identical values.
        const int folded = std::min(y, height - 1 - y);
        const double lat = equirect_to_dir({0.5, folded + 0.5}, 2, height).lat;
        const double c = sincos_deg(lat).cos;
        map.stretch.push_back(c > 1.0 / stretch_max ? std::min(1.0 / c, stretch_max) : stretch_max);
    }
    return map;
}

double horizontal_gradient(const Image& lum, int row, int col)
{
    const int w = lum.width();
    const int xl = wrap(col - 1, w);
    const int xr = wrap(col + 1, w);
    const int yu = std::max(row - 1, 0);
    const int yd = std::min(row + 1, lum.height() - 1);
    const double sum = (lum.at(xr, yu) - lum.at(xl, yu)) + 2.0 * (lum.at(xr, row) - lum.at(xl, row)) +
                       (lum.at(xr, yd) - lum.at(xl, yd));
    return sum / 8.0;
}

std::vector<EdgeLocation> detect_vertical_edges(const Image& img, double grad_threshold)
{
    const Image lum = to_luminance(img);
    const int w = lum.width();
    std::vector<EdgeLocation> edges;
    std::vector<double> g(static_cast<std::size_t>(w));
    for (int y = 0; y < lum.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            g[static_cast<std::size_t>(x)] = std::abs(horizontal_gradient(lum, y, x));
        }
        for (int x = 0; x < w; ++x) {
            const double here = g[static_cast<std::size_t>(x)];
            const double left = g[static_cast<std::size_t>(wrap(x - 1, w))];
            const double right = g[static_cast<std::size_t>(wrap(x + 1, w))];
            if (here > grad_threshold && here >= left && here > right) {
                edges.push_back({y, x});
            }
        }
    }
    return edges;
}

std::optional<double> measure_edge_width(const Image& img, int row, int col)
{
    const Image lum = img.channels() == 1 ? Image() : to_luminance(img);
    const Image& l = img.channels() == 1 ? img : lum;
    const int w = l.width();
    const int cap = std::max(1, w / 4);
    const auto at = [&](int x) { return static_cast<double>(l.at(wrap(x, w), row)); };

    const double slope = horizontal_gradient(l, row, col);
    // Rising edge: walk right to the maximum and left to the minimum.
    const double dir = slope >= 0.0 ? 1.0 : -1.0;

    int right = 0;
    while (dir * (at(col + right + 1) - at(col + right)) > 0.0) {
        if (++right >= cap) {
            return std::nullopt;
        }
    }
    int left = 0;
    while (dir * (at(col - left) - at(col - left - 1)) > 0.0) {
        if (++left >= cap) {
            return std::nullopt;
        }
    }
    if (left + right == 0) {
        return std::nullopt;  // flat along the row; the response came from a neighbouring row
    }
    return static_cast<double>(left + right);
}

BlurReport global_blur(const Image& img, const BlurOptions& options)
{
    const Image lum = to_luminance(img);
    const DistortionMap map = compute_distortion_map(lum.height(), options.stretch_max);
    BlurReport report;
    report.rows.resize(static_cast<std::size_t>(lum.height()));

    for (const EdgeLocation& e : detect_vertical_edges(lum, options.grad_threshold)) {
        const auto width = measure_edge_width(lum, e.row, e.col);
        if (!width) {
            ++report.discarded_count;
            continue;
        }
        const double stretch = map.stretch[static_cast<std::size_t>(e.row)];
        report.samples.push_back({e.row, e.col, *width, *width / stretch});
    }

    report.edge_count = static_cast<long>(report.samples.size());
    if (report.samples.empty()) {
        return report;
    }

    std::vector<double> values;
    values.reserve(report.samples.size());
    double raw_sum = 0.0;
    for (const EdgeSample& s : report.samples) {
        RowBlurSummary& r = report.rows[static_cast<std::size_t>(s.row)];
        ++r.edge_count;
        r.mean_width += s.width;
        r.mean_compensated_width += s.compensated_width;
        raw_sum += s.width;
        values.push_back(options.compensate ? s.compensated_width : s.width);
    }
    for (RowBlurSummary& r : report.rows) {
        if (r.edge_count > 0) {
            r.mean_width /= r.edge_count;
            r.mean_compensated_width /= r.edge_count;
        }
    }
    report.mean_uncompensated_width = raw_sum / static_cast<double>(values.size());

    if (options.statistic == BlurStatistic::median) {
        std::sort(values.begin(), values.end());
        const std::size_t mid = values.size() / 2;
        report.global_blur = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    } else {
        double sum = 0.0;
        for (const double v : values) {
            sum += v;
        }
        report.global_blur = sum / static_cast<double>(values.size());
    }
    return report;
}

}  // namespace omni
