#include "omniview/config.hpp"
#include "omniview/io.hpp"

#include "support/synthetic.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace omni;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "omniview_test_io";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Quantize, RoundHalfUpWithClamp)
{
    EXPECT_EQ(quantize_u8(0.0f), 0);
    EXPECT_EQ(quantize_u8(1.0f), 255);
    EXPECT_EQ(quantize_u8(-0.3f), 0);
    EXPECT_EQ(quantize_u8(7.0f), 255);
    EXPECT_EQ(quantize_u8(0.5f / 255.0f), 1);
    EXPECT_EQ(quantize_u8(0.49f / 255.0f), 0);
    EXPECT_EQ(quantize_u8(std::nanf("")), 0);
    for (int i = 0; i < 256; ++i) {
        ASSERT_EQ(quantize_u8(static_cast<float>(i) / 255.0f), i);
    }
}

TEST(Png, RoundTripRgbAndGray)
{
    for (const int channels : {1, 3}) {
        const Image src = omni::testing::smooth_sphere_image(37, 19, channels);
        const fs::path p = scratch("rt" + std::to_string(channels) + ".png");
        write_png(p, src);
        const Image back = read_png(p);
        ASSERT_EQ(back.width(), 37);
        ASSERT_EQ(back.height(), 19);
        ASSERT_EQ(back.channels(), channels);
        for (std::size_t i = 0; i < src.data().size(); ++i) {
            ASSERT_NEAR(back.data()[i], src.data()[i], 0.5f / 255.0f + 1e-6f);
        }
        // Already-quantized values survive exactly.
        write_png(p, back);
        EXPECT_EQ(read_png(p), back);
    }
}

TEST(Png, MissingAndCorruptFiles)
{
    EXPECT_THROW(read_png(scratch("does_not_exist.png")), IoError);
    write_text_file(scratch("garbage.png"), "not a png at all");
    EXPECT_THROW(read_png(scratch("garbage.png")), FormatError);
    EXPECT_THROW(write_png(scratch("no_such_dir") / "x.png", Image(2, 2, 1)), IoError);
}

TEST(TessellationFile, RoundTripIsExact)
{
    for (const int n : {1, 7, 240}) {
        const Tessellation t = make_tessellation(n, 24.0, 128);
        const std::string text = format_tessellation(t);
        EXPECT_EQ(parse_tessellation(text), t);
        EXPECT_EQ(format_tessellation(parse_tessellation(text)), text);
    }
}

TEST(TessellationFile, HeaderFields)
{
    const std::string text = format_tessellation(make_tessellation(3, 30.0, 64));
    EXPECT_NE(text.find("\"format\": \"omniview-tessellation\""), std::string::npos);
    EXPECT_NE(text.find("\"version\": 1"), std::string::npos);
    EXPECT_NE(text.find("\"count\": 3"), std::string::npos);
}

TEST(TessellationFile, RejectsMalformedDocuments)
{
    const std::string good = format_tessellation(make_tessellation(2, 24.0, 64));
    const auto with = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        const auto pos = s.find(from);
        EXPECT_NE(pos, std::string::npos) << from;
        return s.replace(pos, from.size(), to);
    };
    EXPECT_THROW(parse_tessellation("{"), FormatError);
    EXPECT_THROW(parse_tessellation("[]"), FormatError);
    EXPECT_THROW(parse_tessellation(with("\"version\": 1", "\"version\": 2")), FormatError);
    EXPECT_THROW(parse_tessellation(with("\"count\": 2", "\"count\": 3")), FormatError);
    EXPECT_THROW(parse_tessellation(with("\"fov\": 24", "\"fov\": 95")), FormatError);
    EXPECT_THROW(parse_tessellation(with("\"size\": 64", "\"size\": \"64\"")), FormatError);
    EXPECT_THROW(parse_tessellation(with("\"count\": 2", "\"count\": 2, \"extra\": true")), FormatError);
    EXPECT_THROW(parse_tessellation(with("\"index\": 1", "\"index\": 0")), FormatError);
    EXPECT_THROW(read_tessellation(scratch("missing.json")), IoError);
}

TEST(DetectionFile, RoundTripProperty)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Detection> dets;
        std::vector<ViewportDetection> vdets;
        const int n = static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            const Box b{u(rng) * 1000, u(rng) * 400, 1 + u(rng) * 100, 1 + u(rng) * 100};
            dets.push_back(Detection{static_cast<int>(rng() % 80), u(rng), b});
            vdets.push_back(ViewportDetection{static_cast<int>(rng() % 240), static_cast<int>(rng() % 80), u(rng), b});
        }
        std::istringstream a(format_detections(dets));
        EXPECT_EQ(parse_detections(a), dets);
        std::istringstream b(format_viewport_detections(vdets));
        EXPECT_EQ(parse_viewport_detections(b), vdets);
    }
}

TEST(DetectionFile, LineFormat)
{
    const std::vector<Detection> dets{Detection{2, 0.5, Box{990, 10, 20, 5}}};
    EXPECT_EQ(format_detections(dets), "{\"class_id\":2,\"score\":0.5,\"x\":990.0,\"y\":10.0,\"bw\":20.0,\"bh\":5.0}\n");
    std::istringstream blank("\n{\"class_id\":2,\"score\":0.5,\"x\":990,\"y\":10,\"bw\":20,\"bh\":5}\n\n");
    EXPECT_EQ(parse_detections(blank), dets);
    std::istringstream empty("");
    EXPECT_TRUE(parse_detections(empty).empty());
}

TEST(DetectionFile, RejectsBadLines)
{
    for (const std::string bad : {"{\"class_id\":0,\"score\":0.5,\"x\":1,\"y\":1,\"bw\":1}",
                                  "{\"class_id\":0,\"score\":0.5,\"x\":1,\"y\":1,\"bw\":1,\"bh\":1,\"z\":3}",
                                  "{\"class_id\":\"car\",\"score\":0.5,\"x\":1,\"y\":1,\"bw\":1,\"bh\":1}", "[1,2]",
                                  "nonsense"}) {
        std::istringstream in(bad + "\n");
        EXPECT_THROW(parse_detections(in), FormatError) << bad;
    }
    std::istringstream no_index("{\"class_id\":0,\"score\":0.5,\"x\":1,\"y\":1,\"bw\":1,\"bh\":1}\n");
    EXPECT_THROW(parse_viewport_detections(no_index), FormatError);
}

TEST(TextFile, AtomicWriteReplaces)
{
    const fs::path p = scratch("text.txt");
    write_text_file(p, "first");
    write_text_file(p, "second");
    EXPECT_EQ(read_text_file(p), "second");
    for (const auto& entry : fs::directory_iterator(p.parent_path())) {
        EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
    }
}

TEST(ViewportFileName, Padding)
{
    EXPECT_EQ(viewport_file_name(7, 240), "viewport_0007.png");
    EXPECT_EQ(viewport_file_name(239, 240), "viewport_0239.png");
    EXPECT_EQ(viewport_file_name(12345, 20000), "viewport_12345.png");
}

TEST(Config, DefaultsAndOverrides)
{
    const PipelineConfig d = parse_config("{}");
    EXPECT_EQ(d.tessellation.count, 240);
    EXPECT_EQ(d.tessellation.fov, 24.0);
    EXPECT_EQ(d.fusion.iou_threshold, 0.5);
    EXPECT_FALSE(d.fusion.merge);
    EXPECT_EQ(d.blur.grad_threshold, 0.04);
    EXPECT_EQ(d.jobs, 1);

    const PipelineConfig c = parse_config(R"({"tessellation": {"count": 12, "size": 32},
        "fusion": {"merge": true}, "blur": {"statistic": "median", "compensate": false},
        "io": {"image": "a.png"}, "jobs": 4})");
    EXPECT_EQ(c.tessellation.count, 12);
    EXPECT_EQ(c.tessellation.size, 32);
    EXPECT_EQ(c.tessellation.fov, 24.0);
    EXPECT_TRUE(c.fusion.merge);
    EXPECT_EQ(c.blur.statistic, BlurStatistic::median);
    EXPECT_FALSE(c.blur.compensate);
    EXPECT_EQ(c.io.image, "a.png");
    EXPECT_EQ(c.jobs, 4);
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    EXPECT_THROW(parse_config(R"({"colour": 1})"), FormatError);
    EXPECT_THROW(parse_config(R"({"fusion": {"iou": 0.3}})"), FormatError);
    EXPECT_THROW(parse_config(R"({"fusion": {"iou_threshold": 1.5}})"), FormatError);
    EXPECT_THROW(parse_config(R"({"blur": {"statistic": "mode"}})"), FormatError);
    EXPECT_THROW(parse_config(R"({"jobs": 0})"), FormatError);
    EXPECT_THROW(parse_config(R"({"tessellation": {"fov": 120}})"), FormatError);
    EXPECT_THROW(parse_config("not json"), FormatError);
    EXPECT_THROW(load_config(scratch("absent_config.json")), IoError);
}
