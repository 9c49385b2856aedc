#include "omniview/cli.hpp"

#include "omniview/blur_metric.hpp"
#include "omniview/config.hpp"
#include "omniview/fusion.hpp"
#include "omniview/io.hpp"
#include "omniview/projection.hpp"
#include "omniview/tessellation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace omni::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr int kRenderBatch = 32;
constexpr int kDefaultCoverageSamples = 100000;
constexpr int kDetectorWidth = 896;
constexpr int kDetectorHeight = 448;

std::string fixed(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

const std::string& need(const std::string& value, const char* what)
{
    if (value.empty()) {
        throw UsageError(std::string("missing ") + what);
    }
    return value;
}

void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path == "-") {
        out << text;
    } else {
        write_text_file(path, text);
    }
}

std::vector<Detection> load_detections(const std::string& path)
{
    if (path == "-") {
        return parse_detections(std::cin);
    }
    return read_detections(path);
}

std::vector<ViewportDetection> load_viewport_detections(const std::string& path)
{
    if (path == "-") {
        return parse_viewport_detections(std::cin);
    }
    return read_viewport_detections(path);
}

void check_equirect_size(int width, int height)
{
    if (width < 2 || height < 1) {
        throw std::domain_error("equirect size needs width >= 2 and height >= 1");
    }
}

// Scans for --config before the real parse so its values can seed defaults.
std::optional<std::string> find_config_path(const std::vector<std::string>& args)
{
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw UsageError("--config needs a file argument");
            }
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) {
            return args[i].substr(9);
        }
    }
    return std::nullopt;
}

struct ViewportsArgs {
    int count;
    double fov;
    int size;
    int source_width = 0;
    std::string out;
};

void cmd_viewports(const ViewportsArgs& a, std::ostream& out)
{
    const int size = a.source_width > 0 ? matched_viewport_size(a.fov, a.source_width) : a.size;
    const Tessellation t = make_tessellation(a.count, a.fov, size);
    emit(need(a.out, "output path (-o)"), format_tessellation(t), out);
}

struct RenderArgs {
    std::string image;
    std::string tessellation;
    std::string out_dir;
    int jobs;
};

void cmd_render(const RenderArgs& a, std::ostream& out, std::ostream& err)
{
    const Image img = read_png(need(a.image, "input image"));
    const Tessellation t = read_tessellation(need(a.tessellation, "tessellation file"));
    const fs::path dir = need(a.out_dir, "output directory");
    if (a.jobs < 1) {
        throw std::domain_error("--jobs must be at least 1");
    }
    if (img.width() != 2 * img.height()) {
        err << "warning: input is " << img.width() << "x" << img.height() << ", not 2:1\n";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
    const auto& vps = t.viewports();
    for (std::size_t begin = 0; begin < vps.size(); begin += kRenderBatch) {
        const std::size_t n = std::min<std::size_t>(kRenderBatch, vps.size() - begin);
        const auto rendered = render_viewports(img, std::span(vps).subspan(begin, n), a.jobs);
        for (const ViewportImage& v : rendered) {
            write_png(dir / viewport_file_name(v.viewport.index, t.count()), v.image);
        }
    }
    out << "rendered " << t.count() << " viewports\n";
}

struct BlendArgs {
    std::string tessellation;
    std::string viewport_dir;
    int width = 0;
    int height = 0;
    float fallback = 0.0f;
    std::string out;
};

void cmd_blend(const BlendArgs& a, std::ostream& out)
{
    const Tessellation t = read_tessellation(need(a.tessellation, "tessellation file"));
    const fs::path dir = need(a.viewport_dir, "viewport directory");
    const std::string& out_path = need(a.out, "output path (-o)");
    check_equirect_size(a.width, a.height);
    if (!(a.fallback >= 0.0f && a.fallback <= 1.0f)) {
        throw std::domain_error("--fallback must lie in [0, 1]");
    }
    std::vector<fs::path> files;
    for (const Viewport& vp : t.viewports()) {
        fs::path p = dir / viewport_file_name(vp.index, t.count());
        if (!fs::is_regular_file(p)) {
            throw IoError("missing viewport image for index " + std::to_string(vp.index) + " ('" + p.string() +
                          "')");
        }
        files.push_back(std::move(p));
    }

    std::optional<BlendAccumulator> acc;
    for (const Viewport& vp : t.viewports()) {
        Image img = read_png(files[static_cast<std::size_t>(vp.index)]);
        if (img.width() != vp.size || img.height() != vp.size) {
            throw FormatError("viewport image " + std::to_string(vp.index) + " is not " + std::to_string(vp.size) +
                              "x" + std::to_string(vp.size));
        }
        if (!acc) {
            acc.emplace(a.width, a.height, img.channels());
        }
        acc->accumulate(ViewportImage{vp, std::move(img)});
    }
    Pixel fallback{};
    fallback.fill(a.fallback);
    const BlendResult result = acc->finalize(fallback);
    write_png(out_path, result.image);
    out << "fallback_pixels: " << result.fallback_count << "\n";
}

struct NmsArgs {
    std::string input;
    double iou;
    int width = 0;
    int height = 0;
    bool merge;
    std::string out;
};

void cmd_nms(const NmsArgs& a, std::ostream& out)
{
    const std::string& out_path = need(a.out, "output path (-o)");
    if (a.width < 2) {
        throw std::domain_error("--width must be at least 2");
    }
    const std::vector<Detection> dets = load_detections(need(a.input, "detection file"));
    for (const Detection& d : dets) {
        if (a.height > 0) {
            validate(d, a.width, a.height);
        } else {
            validate(d, a.width, std::numeric_limits<int>::max());
        }
    }
    const auto fused = spherical_nms(dets, a.iou, a.width, a.merge ? NmsMode::merge : NmsMode::discard);
    emit(out_path, format_detections(fused), out);
}

struct LiftArgs {
    std::string input;
    std::string tessellation;
    int width = 0;
    int height = 0;
    std::string out;
};

void cmd_lift(const LiftArgs& a, std::ostream& out)
{
    const std::string& out_path = need(a.out, "output path (-o)");
    check_equirect_size(a.width, a.height);
    const Tessellation t = read_tessellation(need(a.tessellation, "tessellation file"));
    std::vector<Detection> lifted;
    for (const ViewportDetection& vd : load_viewport_detections(need(a.input, "viewport detection file"))) {
        lifted.push_back(lift_detection(vd, t, a.width, a.height));
    }
    emit(out_path, format_detections(lifted), out);
}

void cmd_blur(const std::string& image, const BlurOptions& options, std::ostream& out)
{
    const Image img = read_png(need(image, "input image"));
    const BlurReport r = global_blur(img, options);
    out << "edge_count: " << r.edge_count << "\n";
    out << "discarded_count: " << r.discarded_count << "\n";
    out << "global_blur: " << (r.global_blur ? fixed(*r.global_blur) : "n/a") << "\n";
    out << "mean_uncompensated_width: " << (r.mean_uncompensated_width ? fixed(*r.mean_uncompensated_width) : "n/a")
        << "\n";
}

struct CoverageArgs {
    std::string tessellation;
    int width = 0;
    int height = 0;
    int samples = kDefaultCoverageSamples;
    std::string out;
};

void cmd_coverage(const CoverageArgs& a, std::ostream& out)
{
    const Tessellation t = read_tessellation(need(a.tessellation, "tessellation file"));
    const std::string& out_path = need(a.out, "output path (-o)");
    check_equirect_size(a.width, a.height);
    if (a.samples < 1) {
        throw std::domain_error("--samples must be at least 1");
    }
    const CoverageMap map = compute_coverage_map(t, a.width, a.height);
    Image img(a.width, a.height, 1);
    const double scale = map.max_overlap > 0 ? 0.75 / map.max_overlap : 0.0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(a.width) +
                                  static_cast<std::size_t>(x);
            img.at(x, y) = map.outline[i] ? 1.0f : static_cast<float>(map.overlap[i] * scale);
        }
    }
    const double fraction = coverage_fraction(t, a.samples);
    write_png(out_path, img);
    out << "min_overlap: " << map.min_overlap << "\n";
    out << "max_overlap: " << map.max_overlap << "\n";
    out << "coverage_fraction: " << fixed(fraction) << "\n";
}

struct PrepareArgs {
    std::string image;
    int width = kDetectorWidth;
    int height = kDetectorHeight;
    std::string out;
};

void cmd_prepare(const PrepareArgs& a, std::ostream& out)
{
    const std::string& out_path = need(a.out, "output path (-o)");
    if (a.width < 1 || a.height < 1 || a.width != 2 * a.height) {
        throw std::domain_error("detector input size must be positive with a 2:1 aspect ratio");
    }
    const Image img = read_png(need(a.image, "input image"));
    const Image resized = prepare_detector_input(img, a.width, a.height);
    write_png(out_path, resized);
    out << "wrote " << resized.width() << "x" << resized.height() << "\n";
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    PipelineConfig cfg;
    if (const auto path = find_config_path(args)) {
        cfg = load_config(*path);
    }

    CLI::App app{"Viewport- and image-centric processing of equirectangular 360 images", "omniview"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default parameters");

    ViewportsArgs va{cfg.tessellation.count, cfg.tessellation.fov, cfg.tessellation.size, 0, cfg.io.output};
    auto* viewports = app.add_subcommand("viewports", "Write a Vogel-spiral viewport tessellation");
    viewports->add_option("--count", va.count, "Number of viewports")->capture_default_str();
    viewports->add_option("--fov", va.fov, "Full field of view per viewport, degrees")->capture_default_str();
    auto* size_opt = viewports->add_option("--size", va.size, "Viewport raster size in pixels")->capture_default_str();
    viewports->add_option("--source-width", va.source_width, "Derive --size from this equirect width")
        ->excludes(size_opt);
    viewports->add_option("-o,--out", va.out, "Output tessellation file ('-' for stdout)");

    RenderArgs ra{cfg.io.image, cfg.io.tessellation, cfg.io.viewport_dir, cfg.jobs};
    auto* render = app.add_subcommand("render", "Render every viewport of a tessellation to PNG");
    render->add_option("image", ra.image, "Equirectangular input PNG");
    render->add_option("tessellation", ra.tessellation, "Tessellation file");
    render->add_option("out_dir", ra.out_dir, "Directory for viewport_NNNN.png files");
    render->add_option("-j,--jobs", ra.jobs, "Render worker threads")->capture_default_str();

    BlendArgs ba{cfg.io.tessellation, cfg.io.viewport_dir, 0, 0, 0.0f, cfg.io.output};
    auto* blend = app.add_subcommand("blend", "Back-project viewport images into one equirect image");
    blend->add_option("tessellation", ba.tessellation, "Tessellation file");
    blend->add_option("viewport_dir", ba.viewport_dir, "Directory holding viewport_NNNN.png files");
    blend->add_option("--width", ba.width, "Output width")->required();
    blend->add_option("--height", ba.height, "Output height")->required();
    blend->add_option("--fallback", ba.fallback, "Value for pixels no viewport reaches")->capture_default_str();
    blend->add_option("-o,--out", ba.out, "Output PNG");

    NmsArgs na{cfg.io.detections, cfg.fusion.iou_threshold, 0, 0, cfg.fusion.merge, cfg.io.output};
    auto* nms = app.add_subcommand("nms", "Suppress duplicate detections with cyclic-longitude IoU");
    nms->add_option("detections", na.input, "JSON-lines detections ('-' for stdin)");
    nms->add_option("--iou", na.iou, "IoU threshold")->capture_default_str();
    nms->add_option("--width", na.width, "Equirect image width")->required();
    nms->add_option("--height", na.height, "Equirect image height, enables y validation");
    nms->add_flag("--merge,!--no-merge", na.merge, "Replace kept boxes by the score-weighted mean of their cluster");
    nms->add_option("-o,--out", na.out, "Output detections ('-' for stdout)");

    LiftArgs la{cfg.io.detections, cfg.io.tessellation, 0, 0, cfg.io.output};
    auto* lift = app.add_subcommand("lift", "Map per-viewport detections to equirect coordinates");
    lift->add_option("detections", la.input, "JSON-lines viewport detections ('-' for stdin)");
    lift->add_option("tessellation", la.tessellation, "Tessellation file");
    lift->add_option("--width", la.width, "Equirect image width")->required();
    lift->add_option("--height", la.height, "Equirect image height")->required();
    lift->add_option("-o,--out", la.out, "Output detections ('-' for stdout)");

    std::string blur_image = cfg.io.image;
    BlurOptions bo = cfg.blur;
    std::string statistic = bo.statistic == BlurStatistic::median ? "median" : "mean";
    auto* blur = app.add_subcommand("blur", "Global edge-width blur measure");
    blur->add_option("image", blur_image, "Equirectangular input PNG");
    blur->add_flag("--compensate,!--no-compensate", bo.compensate, "Divide widths by the row stretch factor");
    blur->add_option("--threshold", bo.grad_threshold, "Gradient threshold on [0,1] luma")->capture_default_str();
    blur->add_option("--stretch-max", bo.stretch_max, "Cap of the stretch factor")->capture_default_str();
    blur->add_option("--statistic", statistic, "mean or median")
        ->check(CLI::IsMember({"mean", "median"}))
        ->capture_default_str();

    CoverageArgs ca{cfg.io.tessellation, 0, 0, kDefaultCoverageSamples, cfg.io.output};
    auto* coverage = app.add_subcommand("coverage", "Visualize viewport overlap in equirect space");
    coverage->add_option("tessellation", ca.tessellation, "Tessellation file");
    coverage->add_option("--width", ca.width, "Output width")->required();
    coverage->add_option("--height", ca.height, "Output height")->required();
    coverage->add_option("--samples", ca.samples, "Test directions for the coverage fraction")->capture_default_str();
    coverage->add_option("-o,--out", ca.out, "Output PNG");

    PrepareArgs pa{cfg.io.image, kDetectorWidth, kDetectorHeight, cfg.io.output};
    auto* prepare = app.add_subcommand("prepare", "Resize to a 2:1 detector input");
    prepare->add_option("image", pa.image, "Equirectangular input PNG");
    prepare->add_option("--width", pa.width, "Target width")->capture_default_str();
    prepare->add_option("--height", pa.height, "Target height")->capture_default_str();
    prepare->add_option("-o,--out", pa.out, "Output PNG");

    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    if (viewports->parsed()) {
        cmd_viewports(va, out);
    } else if (render->parsed()) {
        cmd_render(ra, out, err);
    } else if (blend->parsed()) {
        cmd_blend(ba, out);
    } else if (nms->parsed()) {
        cmd_nms(na, out);
    } else if (lift->parsed()) {
        cmd_lift(la, out);
    } else if (blur->parsed()) {
        bo.statistic = statistic == "median" ? BlurStatistic::median : BlurStatistic::mean;
        cmd_blur(blur_image, bo, out);
    } else if (coverage->parsed()) {
        cmd_coverage(ca, out);
    } else if (prepare->parsed()) {
        cmd_prepare(pa, out);
    }
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    try {
        return dispatch(args, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::domain_error& e) {
        err << "invalid input: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    }
}

}  // namespace omni::cli
