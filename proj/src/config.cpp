#include "omniview/config.hpp"

#include "omniview/io.hpp"

#include <json.hpp>

namespace omni {
namespace {

using Json = nlohmann::json;

template <typename T>
void read_field(const Json& obj, const char* key, T& out, const std::string& where)
{
    const auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError("config " + where + "." + key + ": wrong type");
    }
}

void check_keys(const Json& obj, std::initializer_list<const char*> known, const std::string& where)
{
    if (!obj.is_object()) {
        throw FormatError("config " + where + ": expected an object");
    }
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            ok = ok || item.key() == k;
        }
        if (!ok) {
            throw FormatError("config " + where + ": unknown key '" + item.key() + "'");
        }
    }
}

const Json* section(const Json& doc, const char* name)
{
    const auto it = doc.find(name);
    return it == doc.end() ? nullptr : &*it;
}

}  // namespace

void validate(const PipelineConfig& c)
{
    if (c.tessellation.count < 1) {
        throw std::domain_error("tessellation.count must be at least 1");
    }
    validate(Viewport{{}, c.tessellation.fov, c.tessellation.size, 0});
    if (!(c.fusion.iou_threshold > 0.0 && c.fusion.iou_threshold < 1.0)) {
        throw std::domain_error("fusion.iou_threshold must lie in (0, 1)");
    }
    if (!(c.blur.grad_threshold >= 0.0)) {
        throw std::domain_error("blur.grad_threshold must be non-negative");
    }
    if (!(c.blur.stretch_max > 1.0)) {
        throw std::domain_error("blur.stretch_max must exceed 1");
    }
    if (c.jobs < 1) {
        throw std::domain_error("jobs must be at least 1");
    }
}

PipelineConfig parse_config(const std::string& text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    check_keys(doc, {"tessellation", "fusion", "blur", "io", "jobs"}, "root");

    PipelineConfig c;
    if (const Json* s = section(doc, "tessellation")) {
        check_keys(*s, {"count", "fov", "size"}, "tessellation");
        read_field(*s, "count", c.tessellation.count, "tessellation");
        read_field(*s, "fov", c.tessellation.fov, "tessellation");
        read_field(*s, "size", c.tessellation.size, "tessellation");
    }
    if (const Json* s = section(doc, "fusion")) {
        check_keys(*s, {"iou_threshold", "merge"}, "fusion");
        read_field(*s, "iou_threshold", c.fusion.iou_threshold, "fusion");
        read_field(*s, "merge", c.fusion.merge, "fusion");
    }
    if (const Json* s = section(doc, "blur")) {
        check_keys(*s, {"grad_threshold", "stretch_max", "compensate", "statistic"}, "blur");
        read_field(*s, "grad_threshold", c.blur.grad_threshold, "blur");
        read_field(*s, "stretch_max", c.blur.stretch_max, "blur");
        read_field(*s, "compensate", c.blur.compensate, "blur");
        std::string stat = "mean";
        read_field(*s, "statistic", stat, "blur");
        if (stat == "mean") {
            c.blur.statistic = BlurStatistic::mean;
        } else if (stat == "median") {
            c.blur.statistic = BlurStatistic::median;
        } else {
            throw FormatError("config blur.statistic: expected 'mean' or 'median'");
        }
    }
    if (const Json* s = section(doc, "io")) {
        check_keys(*s, {"image", "tessellation", "viewport_dir", "detections", "output"}, "io");
        read_field(*s, "image", c.io.image, "io");
        read_field(*s, "tessellation", c.io.tessellation, "io");
        read_field(*s, "viewport_dir", c.io.viewport_dir, "io");
        read_field(*s, "detections", c.io.detections, "io");
        read_field(*s, "output", c.io.output, "io");
    }
    read_field(doc, "jobs", c.jobs, "root");

    try {
        validate(c);
    } catch (const std::domain_error& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path)
{
    return parse_config(read_text_file(path));
}

}  // namespace omni
