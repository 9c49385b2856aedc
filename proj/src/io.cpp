#include "omniview/io.hpp"

#include <json.hpp>
#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace omni {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kTessellationFormat = "omniview-tessellation";

template <typename T>
T require(const Json& obj, const char* key, const std::string& where)
{
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw FormatError(where + ": missing field '" + key + "'");
    }
    try {
        return it->template get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(where + ": field '" + key + "' has the wrong type");
    }
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> known, const std::string& where)
{
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            ok = ok || item.key() == k;
        }
        if (!ok) {
            throw FormatError(where + ": unknown field '" + item.key() + "'");
        }
    }
}

Json parse_json(const std::string& text, const std::string& where)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(where + ": " + e.what());
    }
}

Box read_box(const Json& obj, const std::string& where)
{
    return Box{require<double>(obj, "x", where), require<double>(obj, "y", where), require<double>(obj, "bw", where),
               require<double>(obj, "bh", where)};
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn)
{
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no);
        const Json obj = parse_json(line, where);
        if (!obj.is_object()) {
            throw FormatError(where + ": expected a JSON object");
        }
        fn(obj, where);
    }
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

}  // namespace

std::uint8_t quantize_u8(float v)
{
    const double scaled = std::floor(static_cast<double>(v) * 255.0 + 0.5);
    if (!(scaled > 0.0)) {
        return 0;
    }
    return scaled >= 255.0 ? std::uint8_t{255} : static_cast<std::uint8_t>(scaled);
}

Image read_png(const std::filesystem::path& path)
{
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        const std::string msg = png.message;
        png_image_free(&png);
        if (!std::filesystem::exists(path)) {
            throw IoError("cannot open '" + path.string() + "' for reading");
        }
        throw FormatError("'" + path.string() + "' is not a readable PNG: " + msg);
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw FormatError("failed to decode '" + path.string() + "': " + msg);
    }
    std::vector<float> pixels(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        pixels[i] = static_cast<float>(buffer[i]) / 255.0f;
    }
    return Image(static_cast<int>(png.width), static_cast<int>(png.height), channels, std::move(pixels));
}

void write_png(const std::filesystem::path& path, const Image& img)
{
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buffer(img.data().size());
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        buffer[i] = quantize_u8(img.data()[i]);
    }
    if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot write '" + path.string() + "': " + msg);
    }
}

std::string format_tessellation(const Tessellation& t)
{
    Json doc;
    doc["format"] = kTessellationFormat;
    doc["version"] = kTessellationFormatVersion;
    doc["count"] = t.count();
    doc["fov"] = t.fov();
    doc["size"] = t.size();
    Json list = Json::array();
    for (const Viewport& vp : t.viewports()) {
        list.push_back(Json{{"index", vp.index}, {"lon", vp.center.lon}, {"lat", vp.center.lat}});
    }
    doc["viewports"] = std::move(list);
    return doc.dump(1) + "\n";
}

Tessellation parse_tessellation(const std::string& text)
{
    const std::string where = "tessellation";
    const Json doc = parse_json(text, where);
    if (!doc.is_object()) {
        throw FormatError("tessellation: expected a JSON object");
    }
    reject_unknown(doc, {"format", "version", "count", "fov", "size", "viewports"}, where);
    if (require<std::string>(doc, "format", where) != kTessellationFormat) {
        throw FormatError("tessellation: unexpected format tag");
    }
    const int version = require<int>(doc, "version", where);
    if (version != kTessellationFormatVersion) {
        throw FormatError("tessellation: unsupported version " + std::to_string(version));
    }
    const int count = require<int>(doc, "count", where);
    const double fov = require<double>(doc, "fov", where);
    const int size = require<int>(doc, "size", where);
    const auto list = doc.find("viewports");
    if (list == doc.end() || !list->is_array() || static_cast<int>(list->size()) != count) {
        throw FormatError("tessellation: viewport list does not hold 'count' records");
    }
    try {
        std::vector<Viewport> viewports;
        viewports.reserve(list->size());
        for (const Json& rec : *list) {
            const std::string w = "tessellation viewport " + std::to_string(viewports.size());
            if (!rec.is_object()) {
                throw FormatError(w + ": expected a JSON object");
            }
            reject_unknown(rec, {"index", "lon", "lat"}, w);
            const double lon = require<double>(rec, "lon", w);
            const double lat = require<double>(rec, "lat", w);
            viewports.push_back(Viewport{normalize_dir(lon, lat), fov, size, require<int>(rec, "index", w)});
        }
        return Tessellation(std::move(viewports), fov);
    } catch (const FormatError&) {
        throw;
    } catch (const std::domain_error& e) {
        throw FormatError(std::string("tessellation: ") + e.what());
    }
}

void write_tessellation(const std::filesystem::path& path, const Tessellation& t)
{
    write_text_file(path, format_tessellation(t));
}

Tessellation read_tessellation(const std::filesystem::path& path)
{
    return parse_tessellation(read_text_file(path));
}

std::string format_detections(const std::vector<Detection>& dets)
{
    std::string out;
    for (const Detection& d : dets) {
        const Json rec{{"class_id", d.class_id}, {"score", d.score}, {"x", d.box.x},
                       {"y", d.box.y},           {"bw", d.box.bw},   {"bh", d.box.bh}};
        out += rec.dump() + "\n";
    }
    return out;
}

std::vector<Detection> parse_detections(std::istream& in)
{
    std::vector<Detection> dets;
    for_each_record(in, [&](const Json& obj, const std::string& where) {
        reject_unknown(obj, {"class_id", "score", "x", "y", "bw", "bh"}, where);
        dets.push_back(Detection{require<int>(obj, "class_id", where), require<double>(obj, "score", where),
                                 read_box(obj, where)});
    });
    return dets;
}

std::string format_viewport_detections(const std::vector<ViewportDetection>& dets)
{
    std::string out;
    for (const ViewportDetection& d : dets) {
        const Json rec{{"viewport_index", d.viewport_index}, {"class_id", d.class_id}, {"score", d.score},
                       {"x", d.box.x}, {"y", d.box.y}, {"bw", d.box.bw}, {"bh", d.box.bh}};
        out += rec.dump() + "\n";
    }
    return out;
}

std::vector<ViewportDetection> parse_viewport_detections(std::istream& in)
{
    std::vector<ViewportDetection> dets;
    for_each_record(in, [&](const Json& obj, const std::string& where) {
        reject_unknown(obj, {"viewport_index", "class_id", "score", "x", "y", "bw", "bh"}, where);
        dets.push_back(ViewportDetection{require<int>(obj, "viewport_index", where),
                                         require<int>(obj, "class_id", where), require<double>(obj, "score", where),
                                         read_box(obj, where)});
    });
    return dets;
}

std::vector<Detection> read_detections(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    return parse_detections(in);
}

std::vector<ViewportDetection> read_viewport_detections(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    return parse_viewport_detections(in);
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError("error while reading '" + path.string() + "'");
    }
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + path.string() + "' for writing");
        }
        out << text;
        if (!out.flush()) {
            throw IoError("error while writing '" + path.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot write '" + path.string() + "'");
    }
}

std::string viewport_file_name(int index, int count)
{
    const int digits = std::max(4, static_cast<int>(std::to_string(std::max(count - 1, 0)).size()));
    std::string num = std::to_string(index);
    if (static_cast<int>(num.size()) < digits) {
        num.insert(0, static_cast<std::size_t>(digits) - num.size(), '0');
    }
    return "viewport_" + num + ".png";
}

}  // namespace omni
