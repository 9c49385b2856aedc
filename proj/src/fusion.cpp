#include "omniview/fusion.hpp"

#include "omniview/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace omni {
namespace {

double overlap(double a0, double a1, double b0, double b1)
{
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double wrap_x(double x, double w)
{
    double r = x - w * std::floor(x / w);
    if (r >= w || r < 0.0) {
        r = 0.0;
    }
    return r;
}

double cyclic_iou_ordered(const Box& a, const Box& b, double w)
{
    // Boxes are at most w wide, so their shifted copies never overlap each
    // other and the circular intersection is the sum over the unrollings.
    double ix = 0.0;
    for (const double shift : {-w, 0.0, w}) {
        ix += overlap(a.x, a.x + a.bw, b.x + shift, b.x + shift + b.bw);
    }
    const double iy = overlap(a.y, a.y + a.bh, b.y, b.y + b.bh);
    const double inter = ix * iy;
    const double uni = a.bw * a.bh + b.bw * b.bh - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<std::size_t> nms_order(const std::vector<Detection>& dets)
{
    for (const Detection& d : dets) {
        if (!std::isfinite(d.score)) {
            throw std::domain_error("detection score must be finite");
        }
    }
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (dets[i].score != dets[j].score) {
            return dets[i].score > dets[j].score;
        }
        return dets[i].class_id < dets[j].class_id;
    });
    return order;
}

Box merge_boxes(const std::vector<const Detection*>& group, double w)
{
    const Box& ref = group.front()->box;
    const double ref_cx = ref.x + ref.bw * 0.5;
    double total = 0.0;
    for (const Detection* d : group) {
        total += d->score;
    }
    const bool uniform = !(total > 0.0);
    if (uniform) {
        total = static_cast<double>(group.size());
    }
    double dx = 0.0;
    double cy = 0.0;
    double bw = 0.0;
    double bh = 0.0;
    for (const Detection* d : group) {
        const double s = uniform ? 1.0 : d->score;
        double off = d->box.x + d->box.bw * 0.5 - ref_cx;
        off -= w * std::nearbyint(off / w);
        dx += s * off;
        cy += s * (d->box.y + d->box.bh * 0.5);
        bw += s * d->box.bw;
        bh += s * d->box.bh;
    }
    bw /= total;
    bh /= total;
    return Box{wrap_x(ref_cx + dx / total - bw * 0.5, w), cy / total - bh * 0.5, bw, bh};
}

template <typename Iou>
std::vector<Detection> greedy_nms(const std::vector<Detection>& dets, double iou_threshold, NmsMode mode,
                                  double width, Iou iou)
{
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw std::domain_error("IoU threshold must lie in (0, 1)");
    }
    const std::vector<std::size_t> order = nms_order(dets);
    std::vector<bool> suppressed(dets.size(), false);
    std::vector<Detection> kept;
    for (std::size_t a = 0; a < order.size(); ++a) {
        const std::size_t i = order[a];
        if (suppressed[i]) {
            continue;
        }
        std::vector<const Detection*> group{&dets[i]};
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const std::size_t j = order[b];
            if (suppressed[j] || dets[j].class_id != dets[i].class_id) {
                continue;
            }
            if (iou(dets[i].box, dets[j].box) > iou_threshold) {
                suppressed[j] = true;
                group.push_back(&dets[j]);
            }
        }
        Detection out = dets[i];
        if (mode == NmsMode::merge && group.size() > 1) {
            out.box = merge_boxes(group, width);
        }
        kept.push_back(out);
    }
    return kept;
}

}  // namespace

void validate(const Detection& d, int width, int height)
{
    const double w = width;
    const double h = height;
    constexpr double tol = 1e-9;
    if (d.class_id < 0) {
        throw std::domain_error("class_id must be non-negative");
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw std::domain_error("score must lie in [0, 1]");
    }
    const Box& b = d.box;
    if (!(b.x >= 0.0 && b.x < w) || !(b.bw > 0.0 && b.bw <= w)) {
        throw std::domain_error("box x extent invalid for width " + std::to_string(width));
    }
    if (!(b.y >= 0.0 && b.y < h) || !(b.bh > 0.0 && b.y + b.bh <= h + tol)) {
        throw std::domain_error("box y extent invalid for height " + std::to_string(height));
    }
}

Detection lift_detection(const ViewportDetection& vd, const Tessellation& t, int width, int height)
{
    if (vd.viewport_index < 0 || vd.viewport_index >= t.count()) {
        throw std::domain_error("viewport index " + std::to_string(vd.viewport_index) + " not in tessellation");
    }
    const Viewport& vp = t[vd.viewport_index];
    const Box& b = vd.box;
    const double size = vp.size;
    if (!(b.bw > 0.0 && b.bh > 0.0 && b.x >= 0.0 && b.y >= 0.0 && b.x + b.bw <= size && b.y + b.bh <= size)) {
        throw std::domain_error("viewport box must have positive extent inside the viewport raster");
    }

    const std::array<double, 3> xs{b.x, b.x + b.bw * 0.5, b.x + b.bw};
    const std::array<double, 3> ys{b.y, b.y + b.bh * 0.5, b.y + b.bh};
    std::vector<double> ex;
    double y_min = height;
    double y_max = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == 1 && j == 1) {
                continue;
            }
            const ViewportCoord c = raster_to_viewport({xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]},
                                                       vp.size);
            const EquirectCoord e = dir_to_equirect(gnomonic_inverse(c, vp), width, height);
            ex.push_back(e.x);
            y_min = std::min(y_min, e.y);
            y_max = std::max(y_max, e.y);
        }
    }

    // Minimal arc holding every sample: the complement of the largest gap.
    std::sort(ex.begin(), ex.end());
    const double w = width;
    std::size_t gap_end = 0;
    double largest_gap = ex.front() + w - ex.back();
    for (std::size_t i = 1; i < ex.size(); ++i) {
        const double gap = ex[i] - ex[i - 1];
        if (gap > largest_gap) {
            largest_gap = gap;
            gap_end = i;
        }
    }
    const double span = w - largest_gap;
    if (!(span < w * 0.5)) {
        throw std::domain_error("lifted box spans 180 degrees of longitude or more");
    }
    if (!(span > 0.0) || !(y_max > y_min)) {
        throw std::domain_error("lifted box is degenerate");
    }
    return Detection{vd.class_id, vd.score, Box{ex[gap_end], y_min, span, y_max - y_min}};
}

double cyclic_iou(const Box& a, const Box& b, int width)
{
    // Fixed argument order makes the result exactly symmetric.
    if (std::tie(b.x, b.y, b.bw, b.bh) < std::tie(a.x, a.y, a.bw, a.bh)) {
        return cyclic_iou_ordered(b, a, width);
    }
    return cyclic_iou_ordered(a, b, width);
}

double cyclic_iou(const Detection& a, const Detection& b, int width)
{
    return cyclic_iou(a.box, b.box, width);
}

double planar_iou(const Box& a, const Box& b)
{
    const double inter = overlap(a.x, a.x + a.bw, b.x, b.x + b.bw) * overlap(a.y, a.y + a.bh, b.y, b.y + b.bh);
    const double uni = a.bw * a.bh + b.bw * b.bh - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> spherical_nms(const std::vector<Detection>& dets, double iou_threshold, int width,
                                     NmsMode mode)
{
    return greedy_nms(dets, iou_threshold, mode, width,
                      [width](const Box& a, const Box& b) { return cyclic_iou(a, b, width); });
}

std::vector<Detection> planar_nms(const std::vector<Detection>& dets, double iou_threshold)
{
    return greedy_nms(dets, iou_threshold, NmsMode::discard, 0.0,
                      [](const Box& a, const Box& b) { return planar_iou(a, b); });
}

std::vector<Detection> rotate_detections(const std::vector<Detection>& dets, double delta_lon, int width)
{
    const double w = width;
    const double shift = std::fmod(delta_lon, 360.0) * w / 360.0;
    std::vector<Detection> out = dets;
    if (shift == 0.0) {
        return out;
    }
    for (Detection& d : out) {
        d.box.x = wrap_x(d.box.x + shift, w);
    }
    return out;
}

}  // namespace omni
