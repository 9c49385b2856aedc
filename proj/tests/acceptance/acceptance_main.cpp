// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: omniview_acceptance [path/to/omniview]
// Without the binary path, CLI criteria run the commands in-process.

#include "omniview/blur_metric.hpp"
#include "omniview/cli.hpp"
#include "omniview/fusion.hpp"
#include "omniview/io.hpp"
#include "omniview/projection.hpp"
#include "omniview/sphere_geom.hpp"
#include "omniview/tessellation.hpp"

#include "support/synthetic.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace omni;
namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_work;

struct Outcome {
    bool pass;
    std::string detail;
};

struct CliResult {
    int code;
    std::string out;
};

std::string quote(const std::string& s)
{
    std::string q = "'";
    for (const char c : s) {
        q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    }
    return q + "'";
}

CliResult run_cli(const std::vector<std::string>& args)
{
    if (g_binary.empty()) {
        std::vector<std::string> full{"omniview"};
        full.insert(full.end(), args.begin(), args.end());
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(full, out, err);
        return {code, out.str()};
    }
    std::string cmd = quote(g_binary);
    for (const std::string& a : args) {
        cmd += " " + quote(a);
    }
    cmd += " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return {-1, {}};
    }
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        out.append(buf, n);
    }
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string field(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + ": ", 0) == 0) {
            return line.substr(key.size() + 2);
        }
    }
    return {};
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome geometry_round_trips()
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> plane(-0.999, 0.999);
    double worst_equirect = 0.0;
    double worst_gnomonic = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const SphereDir d = omni::testing::random_dir(rng);
        const SphereDir e = equirect_to_dir(dir_to_equirect(d, 3840, 1920), 3840, 1920);
        worst_equirect = std::max(worst_equirect, angular_distance(d, e));

        const Viewport vp{omni::testing::random_dir(rng), 24.0 + 60.0 * (i % 3) / 2.0, 64, 0};
        const SphereDir g = gnomonic_inverse({plane(rng), plane(rng)}, vp);
        const auto c = gnomonic_forward(g, vp);
        if (!c) {
            return {false, "direction inside the viewport did not project"};
        }
        worst_gnomonic = std::max(worst_gnomonic, angular_distance(g, gnomonic_inverse(*c, vp)));
    }
    const bool ok = worst_equirect < 1e-9 && worst_gnomonic < 1e-9;
    return {ok, "max err equirect " + fmt("%.2e", worst_equirect) + " deg, gnomonic " + fmt("%.2e", worst_gnomonic) +
                    " deg"};
}

Outcome default_tessellation_coverage()
{
    const Tessellation t = make_tessellation(240, 24.0, 256);
    const double fraction = coverage_fraction(t, 100000);
    const fs::path tpath = g_work / "default_tess.json";
    write_tessellation(tpath, t);
    const CliResult r = run_cli({"coverage", tpath.string(), "--width", "1024", "--height", "512", "-o",
                                 (g_work / "default_coverage.png").string()});
    const std::string min_overlap = field(r.out, "min_overlap");
    const bool ok = r.code == 0 && fraction >= 0.999 && !min_overlap.empty() && std::stoi(min_overlap) >= 1;
    return {ok, "coverage_fraction " + fmt("%.6f", fraction) + ", cmd min_overlap " +
                    (min_overlap.empty() ? "?" : min_overlap)};
}

Outcome identity_pipeline()
{
    const EquirectImage src = omni::testing::smooth_sphere_image(1024, 512);
    const Tessellation t = make_tessellation(240, 24.0, 64);
    BlendAccumulator acc(1024, 512, src.channels());
    for (const Viewport& vp : t.viewports()) {
        acc.accumulate(render_viewport(src, vp));
    }
    const BlendResult r = acc.finalize();
    const double p = psnr(r.image, src);
    return {p >= 40.0 && r.fallback_count == 0,
            "PSNR " + fmt("%.2f", p) + " dB, fallback pixels " + std::to_string(r.fallback_count)};
}

bool same_set(std::vector<Detection> a, std::vector<Detection> b, double w)
{
    if (a.size() != b.size()) {
        return false;
    }
    const auto cyc = [w](double x, double y) {
        const double d = std::fmod(std::abs(x - y), w);
        return std::min(d, w - d);
    };
    for (const Detection& d : a) {
        const auto it = std::find_if(b.begin(), b.end(), [&](const Detection& e) {
            return e.class_id == d.class_id && e.score == d.score && cyc(e.box.x, d.box.x) < 1e-9 &&
                   std::abs(e.box.y - d.box.y) < 1e-9 && std::abs(e.box.bw - d.box.bw) < 1e-9 &&
                   std::abs(e.box.bh - d.box.bh) < 1e-9;
        });
        if (it == b.end()) {
            return false;
        }
        b.erase(it);
    }
    return true;
}

Detection random_detection(std::mt19937_64& rng, double w, double h, double max_bw)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double bw = 1.0 + u(rng) * (max_bw - 1.0);
    const double bh = 1.0 + u(rng) * 0.3 * h;
    const double x = std::min(u(rng) * w, std::nextafter(w, 0.0));
    return Detection{static_cast<int>(rng() % 3), u(rng), Box{x, u(rng) * (h - bh), bw, bh}};
}

Outcome seam_fusion()
{
    // Object covering x in [990, 1040) mod 1000: the right border sees [990, 1030),
    // the left border [0, 40).
    const int w = 1000;
    const std::vector<Detection> raw{Detection{0, 0.9, Box{990, 200, 40, 60}}, Detection{0, 0.8, Box{0, 200, 40, 60}}};
    const auto fused = spherical_nms(raw, 0.5, w);
    const auto planar = planar_nms(raw, 0.5);
    bool ok = raw.size() == 2 && fused.size() == 1 && planar.size() == 2;

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> delta(-540.0, 540.0);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Detection> dets;
        const int n = 1 + static_cast<int>(rng() % 25);
        for (int i = 0; i < n; ++i) {
            dets.push_back(random_detection(rng, w, 500, 300));
        }
        const double d = delta(rng);
        if (!same_set(spherical_nms(rotate_detections(dets, d, w), 0.5, w),
                      rotate_detections(spherical_nms(dets, 0.5, w), d, w), w)) {
            ++mismatches;
        }
    }
    ok = ok && mismatches == 0;
    return {ok, "raw 2 -> spherical " + std::to_string(fused.size()) + ", planar " + std::to_string(planar.size()) +
                    "; rotation mismatches " + std::to_string(mismatches) + "/1000"};
}

double textbook_iou(const Box& a, const Box& b)
{
    const double ix = std::max(0.0, std::min(a.x + a.bw, b.x + b.bw) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.bh, b.y + b.bh) - std::max(a.y, b.y));
    return ix * iy / (a.bw * a.bh + b.bw * b.bh - ix * iy);
}

Outcome cyclic_iou_oracle()
{
    const double w = 1000.0;
    std::mt19937_64 rng(5);
    double worst = 0.0;
    bool symmetric = true;
    for (int i = 0; i < 10000; ++i) {
        const Detection a = random_detection(rng, w, 500, w / 2);
        const Detection b = random_detection(rng, w, 500, w / 2);
        double oracle = 0.0;
        for (const double shift : {-w, 0.0, w}) {
            Box s = b.box;
            s.x += shift;
            oracle = std::max(oracle, textbook_iou(a.box, s));
        }
        const double got = cyclic_iou(a, b, static_cast<int>(w));
        worst = std::max(worst, std::abs(got - oracle));
        symmetric = symmetric && got == cyclic_iou(b, a, static_cast<int>(w));
    }
    return {worst < 1e-12 && symmetric,
            "max |diff| " + fmt("%.2e", worst) + (symmetric ? ", symmetric" : ", NOT symmetric")};
}

Outcome blur_compensation()
{
    const int w = 512;
    const int h = 256;
    const auto row = omni::testing::pinstripe_row(w, 8);
    const Image equator = omni::testing::band_image(w, h, 0.0, 8, row);
    const Image sixty = omni::testing::band_image(w, h, 60.0, 8, omni::testing::stretched_row(row));
    BlurOptions raw;
    raw.compensate = false;
    const double ce = *global_blur(equator).global_blur;
    const double cs = *global_blur(sixty).global_blur;
    const double ue = *global_blur(equator, raw).global_blur;
    const double us = *global_blur(sixty, raw).global_blur;
    bool ok = std::abs(cs / ce - 1.0) <= 0.1 && std::abs(us / ue - 2.0) <= 0.2;

    // Fixed test image: random-level blocks, blurred horizontally, 8-bit quantized.
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> level(0.1, 0.9);
    Image base(w, h, 1, 0.5f);
    for (int band = 0; band < h; band += 8) {
        int x = static_cast<int>(rng() % 32);
        while (x < w) {
            const int len = 48 + static_cast<int>(rng() % 32);
            const auto v = static_cast<float>(level(rng));
            for (int y = band; y < band + 8; ++y) {
                for (int i = x; i < std::min(w, x + len); ++i) {
                    base.at(i, y) = v;
                }
            }
            x += len;
        }
    }
    std::string series;
    double previous = 0.0;
    for (const double sigma : {0.0, 1.0, 2.0, 4.0}) {
        const auto g = global_blur(omni::testing::quantized(omni::testing::gaussian_blur_x(base, sigma))).global_blur;
        ok = ok && g && *g > previous;
        previous = g ? *g : previous;
        series += (series.empty() ? "" : " < ") + fmt("%.3f", g.value_or(0.0));
    }
    return {ok, "compensated ratio " + fmt("%.3f", cs / ce) + ", uncompensated ratio " + fmt("%.3f", us / ue) +
                    ", sigma series " + series};
}

Outcome vogel_uniformity()
{
    bool ok = true;
    std::string detail;
    for (const int n : {10, 100, 240, 1000}) {
        const auto pts = vogel_points(n);
        std::vector<double> nn(pts.size(), 1e9);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double d = angular_distance(pts[i], pts[j]);
                nn[i] = std::min(nn[i], d);
                nn[j] = std::min(nn[j], d);
            }
        }
        const auto [lo, hi] = std::minmax_element(nn.begin(), nn.end());
        const double floor = 0.5 * std::sqrt(41253.0 / n);
        ok = ok && *hi / *lo <= 2.0 && *lo >= floor;
        detail += (detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + " ratio " +
                  fmt("%.3f", *hi / *lo) + " min " + fmt("%.2f", *lo);
    }
    return {ok, detail};
}

Outcome cli_determinism()
{
    const fs::path d = g_work / "determinism";
    fs::remove_all(d);
    fs::create_directories(d);
    const auto p = [&](const std::string& name) { return (d / name).string(); };

    write_png(p("src.png"), omni::testing::smooth_sphere_image(512, 256));
    write_png(p("sharp.png"), omni::testing::band_image(512, 256, 30.0, 8, omni::testing::pinstripe_row(512, 8)));
    write_text_file(p("dets.jsonl"), format_detections({Detection{0, 0.9, Box{500, 100, 40, 60}},
                                                        Detection{0, 0.7, Box{0, 100, 40, 60}},
                                                        Detection{1, 0.6, Box{100, 10, 30, 30}}}));
    write_text_file(p("vdets.jsonl"),
                    format_viewport_detections({ViewportDetection{3, 0, 0.9, Box{4, 4, 8, 8}},
                                                ViewportDetection{100, 1, 0.5, Box{0, 0, 16, 16}}}));

    std::vector<std::string> failed;
    int commands = 0;
    for (const std::string run : {"a", "b"}) {
        const std::vector<std::vector<std::string>> cmds{
            {"viewports", "--count", "240", "--size", "16", "-o", p("t_" + run + ".json")},
            {"render", p("src.png"), p("t_a.json"), p("views_" + run), "--jobs", "4"},
            {"blend", p("t_a.json"), p("views_a"), "--width", "512", "--height", "256", "-o", p("blend_" + run + ".png")},
            {"nms", p("dets.jsonl"), "--width", "1000", "-o", p("nms_" + run + ".jsonl")},
            {"lift", p("vdets.jsonl"), p("t_a.json"), "--width", "1000", "--height", "500", "-o",
             p("lift_" + run + ".jsonl")},
            {"coverage", p("t_a.json"), "--width", "256", "--height", "128", "--samples", "20000", "-o",
             p("cov_" + run + ".png")},
            {"prepare", p("src.png"), "--width", "128", "--height", "64", "-o", p("prep_" + run + ".png")},
        };
        for (const auto& c : cmds) {
            const CliResult r = run_cli(c);
            ++commands;
            if (r.code != 0) {
                failed.push_back(c[0] + " exit " + std::to_string(r.code));
            }
        }
        const CliResult blur = run_cli({"blur", p("sharp.png")});
        write_text_file(p("blur_" + run + ".txt"), blur.out);
        ++commands;
    }
    const auto same = [&](const std::string& a, const std::string& b) {
        return fs::exists(a) && fs::exists(b) && read_text_file(a) == read_text_file(b);
    };
    for (const std::string stem : {"t_%.json", "blend_%.png", "nms_%.jsonl", "lift_%.jsonl", "cov_%.png",
                                   "prep_%.png", "blur_%.txt"}) {
        std::string a = stem;
        std::string b = stem;
        a.replace(a.find('%'), 1, "a");
        b.replace(b.find('%'), 1, "b");
        if (!same(p(a), p(b))) {
            failed.push_back(a);
        }
    }
    int view_files = 0;
    for (const auto& e : fs::directory_iterator(p("views_a"))) {
        ++view_files;
        if (!same(e.path().string(), (d / "views_b" / e.path().filename()).string())) {
            failed.push_back("render " + e.path().filename().string());
        }
    }
    if (view_files != 240) {
        failed.push_back("render wrote " + std::to_string(view_files) + " files");
    }
    std::string detail = std::to_string(commands / 2) + " commands x 2 runs";
    for (const auto& f : failed) {
        detail += "; differs: " + f;
    }
    return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc > 1) {
        g_binary = argv[1];
    }
    g_work = fs::temp_directory_path() / "omniview_acceptance";
    fs::create_directories(g_work);

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "geometry round trips", 1.0, geometry_round_trips},
        {2, "240 x 24 deg tessellation coverage", 30.0, default_tessellation_coverage},
        {3, "identity pipeline PSNR", 60.0, identity_pipeline},
        {4, "seam fusion and rotation invariance", 10.0, seam_fusion},
        {5, "cyclic IoU oracle", 5.0, cyclic_iou_oracle},
        {6, "blur compensation and monotonicity", 10.0, blur_compensation},
        {7, "Vogel uniformity", 5.0, vogel_uniformity},
        {8, "CLI determinism", 0.0, cli_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_s <= 0.0 || secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s [%d] %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    in_time ? "" : ", over budget");
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
