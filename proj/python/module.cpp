#include "omniview/blur_metric.hpp"
#include "omniview/fusion.hpp"
#include "omniview/io.hpp"
#include "omniview/projection.hpp"
#include "omniview/sphere_geom.hpp"
#include "omniview/tessellation.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <stdexcept>

namespace py = pybind11;
using namespace omni;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, C) float32 <-> Image
Image to_image(const FloatArray& a)
{
    if (a.ndim() != 2 && a.ndim() != 3) {
        throw std::domain_error("image must have shape (H, W) or (H, W, C)");
    }
    const int channels = a.ndim() == 2 ? 1 : static_cast<int>(a.shape(2));
    if (channels != 1 && channels != 3) {
        throw std::domain_error("image must have 1 or 3 channels");
    }
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return Image(w, h, channels, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const Image& img)
{
    std::vector<py::ssize_t> shape{img.height(), img.width()};
    if (img.channels() == 3) {
        shape.push_back(3);
    }
    FloatArray out(shape);
    std::copy(img.data().begin(), img.data().end(), out.mutable_data());
    return out;
}

py::dict report_dict(const BlurReport& r)
{
    py::dict d;
    d["edge_count"] = r.edge_count;
    d["discarded_count"] = r.discarded_count;
    d["global_blur"] = r.global_blur;
    d["mean_uncompensated_width"] = r.mean_uncompensated_width;
    std::vector<double> widths;
    std::vector<double> compensated;
    std::vector<int> rows;
    for (const EdgeSample& s : r.samples) {
        rows.push_back(s.row);
        widths.push_back(s.width);
        compensated.push_back(s.compensated_width);
    }
    d["rows"] = py::array(py::cast(rows));
    d["widths"] = py::array(py::cast(widths));
    d["compensated_widths"] = py::array(py::cast(compensated));
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Equirectangular viewport tessellation, seam-aware NMS and blur measurement";

    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    py::class_<SphereDir>(m, "SphereDir")
        .def(py::init([](double lon, double lat) { return normalize_dir(lon, lat); }), py::arg("lon"),
             py::arg("lat"))
        .def_readonly("lon", &SphereDir::lon)
        .def_readonly("lat", &SphereDir::lat)
        .def("__iter__", [](const SphereDir& d) { return py::iter(py::make_tuple(d.lon, d.lat)); })
        .def("__eq__", [](const SphereDir& a, const SphereDir& b) { return a == b; })
        .def("__repr__", [](const SphereDir& d) {
            return "SphereDir(lon=" + py::repr(py::float_(d.lon)).cast<std::string>() +
                   ", lat=" + py::repr(py::float_(d.lat)).cast<std::string>() + ")";
        });

    py::class_<Viewport>(m, "Viewport")
        .def(py::init([](SphereDir center, double fov, int size, int index) {
                 Viewport vp{center, fov, size, index};
                 validate(vp);
                 return vp;
             }),
             py::arg("center"), py::arg("fov") = kDefaultFovDeg, py::arg("size") = 256, py::arg("index") = 0)
        .def_readonly("center", &Viewport::center)
        .def_readonly("fov", &Viewport::fov)
        .def_readonly("size", &Viewport::size)
        .def_readonly("index", &Viewport::index)
        .def("__repr__", [](const Viewport& v) {
            return "Viewport(index=" + std::to_string(v.index) + ", lon=" + std::to_string(v.center.lon) +
                   ", lat=" + std::to_string(v.center.lat) + ", fov=" + std::to_string(v.fov) +
                   ", size=" + std::to_string(v.size) + ")";
        });

    py::class_<Tessellation>(m, "Tessellation")
        .def_property_readonly("viewports", &Tessellation::viewports)
        .def_property_readonly("count", &Tessellation::count)
        .def_property_readonly("fov", &Tessellation::fov)
        .def_property_readonly("size", &Tessellation::size)
        .def("__len__", &Tessellation::count)
        .def("__getitem__", [](const Tessellation& t, int i) {
            if (i < 0) {
                i += t.count();
            }
            if (i < 0 || i >= t.count()) {
                throw py::index_error();
            }
            return t[i];
        })
        .def("__eq__", [](const Tessellation& a, const Tessellation& b) { return a == b; });

    py::class_<Box>(m, "Box")
        .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("bw"), py::arg("bh"))
        .def_readwrite("x", &Box::x)
        .def_readwrite("y", &Box::y)
        .def_readwrite("bw", &Box::bw)
        .def_readwrite("bh", &Box::bh)
        .def("__eq__", [](const Box& a, const Box& b) { return a == b; })
        .def("__repr__", [](const Box& b) {
            return "Box(x=" + std::to_string(b.x) + ", y=" + std::to_string(b.y) + ", bw=" + std::to_string(b.bw) +
                   ", bh=" + std::to_string(b.bh) + ")";
        });

    py::class_<Detection>(m, "Detection")
        .def(py::init<int, double, Box>(), py::arg("class_id"), py::arg("score"), py::arg("box"))
        .def_readwrite("class_id", &Detection::class_id)
        .def_readwrite("score", &Detection::score)
        .def_readwrite("box", &Detection::box)
        .def("__eq__", [](const Detection& a, const Detection& b) { return a == b; })
        .def("__repr__", [](const Detection& d) {
            return "Detection(class_id=" + std::to_string(d.class_id) + ", score=" + std::to_string(d.score) +
                   ", box=" + py::repr(py::cast(d.box)).cast<std::string>() + ")";
        });

    py::class_<ViewportDetection>(m, "ViewportDetection")
        .def(py::init<int, int, double, Box>(), py::arg("viewport_index"), py::arg("class_id"), py::arg("score"),
             py::arg("box"))
        .def_readwrite("viewport_index", &ViewportDetection::viewport_index)
        .def_readwrite("class_id", &ViewportDetection::class_id)
        .def_readwrite("score", &ViewportDetection::score)
        .def_readwrite("box", &ViewportDetection::box);

    // Geometry
    m.def(
        "equirect_to_dir",
        [](double x, double y, int width, int height) { return equirect_to_dir({x, y}, width, height); },
        py::arg("x"), py::arg("y"), py::arg("width"), py::arg("height"));
    m.def(
        "dir_to_equirect",
        [](SphereDir d, int width, int height) {
            const EquirectCoord c = dir_to_equirect(d, width, height);
            return py::make_tuple(c.x, c.y);
        },
        py::arg("dir"), py::arg("width"), py::arg("height"));
    m.def("angular_distance", &angular_distance, py::arg("a"), py::arg("b"));
    m.def(
        "gnomonic_forward",
        [](SphereDir d, const Viewport& vp) -> py::object {
            const auto c = gnomonic_forward(d, vp);
            return c ? py::object(py::make_tuple(c->u, c->v)) : py::none();
        },
        py::arg("dir"), py::arg("viewport"), "Tangent-plane (u, v), or None outside the footprint.");
    m.def(
        "gnomonic_inverse", [](double u, double v, const Viewport& vp) { return gnomonic_inverse({u, v}, vp); },
        py::arg("u"), py::arg("v"), py::arg("viewport"));

    // Tessellation
    m.def(
        "vogel_points",
        [](int n) {
            std::vector<std::array<double, 2>> out;
            for (const SphereDir& d : vogel_points(n)) {
                out.push_back({d.lon, d.lat});
            }
            return py::array(py::cast(out));
        },
        py::arg("n"), "(n, 2) array of (lon, lat) in degrees.");
    m.def("make_tessellation", &make_tessellation, py::arg("count") = kDefaultViewportCount,
          py::arg("fov") = kDefaultFovDeg, py::arg("size") = 256);
    m.def("matched_viewport_size", &matched_viewport_size, py::arg("fov"), py::arg("source_width"));
    m.def(
        "viewports_containing",
        [](const Tessellation& t, SphereDir d) { return viewports_containing(t, d); }, py::arg("tessellation"),
        py::arg("dir"));
    m.def("coverage_fraction", &coverage_fraction, py::arg("tessellation"), py::arg("samples") = 100000);
    m.def(
        "coverage_map",
        [](const Tessellation& t, int width, int height) {
            const CoverageMap c = compute_coverage_map(t, width, height);
            py::array_t<int> out({height, width});
            std::copy(c.overlap.begin(), c.overlap.end(), out.mutable_data());
            return out;
        },
        py::arg("tessellation"), py::arg("width"), py::arg("height"), "(H, W) array of overlap counts.");

    // Projection
    m.def(
        "render_viewport", [](const FloatArray& img, const Viewport& vp) {
            const Image src = to_image(img);
            Image out;
            {
                py::gil_scoped_release release;
                out = render_viewport(src, vp).image;
            }
            return to_array(out);
        },
        py::arg("image"), py::arg("viewport"));
    m.def(
        "render_viewports",
        [](const FloatArray& img, const Tessellation& t, int jobs) {
            const Image src = to_image(img);
            std::vector<ViewportImage> views;
            {
                py::gil_scoped_release release;
                views = render_viewports(src, t.viewports(), jobs);
            }
            py::list out;
            for (const ViewportImage& v : views) {
                out.append(to_array(v.image));
            }
            return out;
        },
        py::arg("image"), py::arg("tessellation"), py::arg("jobs") = 1);
    m.def(
        "blend",
        [](const Tessellation& t, const std::vector<FloatArray>& views, int width, int height) {
            if (static_cast<int>(views.size()) != t.count()) {
                throw std::domain_error("need one image per viewport");
            }
            std::vector<Image> images;
            for (const FloatArray& v : views) {
                images.push_back(to_image(v));
            }
            const int channels = images.empty() ? 1 : images.front().channels();
            BlendResult r;
            {
                py::gil_scoped_release release;
                BlendAccumulator acc(width, height, channels);
                for (std::size_t i = 0; i < images.size(); ++i) {
                    acc.accumulate({t.viewports()[i], std::move(images[i])});
                }
                r = acc.finalize();
            }
            return py::make_tuple(to_array(r.image), r.fallback_count);
        },
        py::arg("tessellation"), py::arg("views"), py::arg("width"), py::arg("height"),
        "Back-projects viewport images; returns (image, fallback_pixel_count).");
    m.def(
        "prepare_detector_input",
        [](const FloatArray& img, int width, int height) {
            return to_array(prepare_detector_input(to_image(img), width, height));
        },
        py::arg("image"), py::arg("width") = 896, py::arg("height") = 448);
    m.def(
        "psnr", [](const FloatArray& a, const FloatArray& b) { return psnr(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"));

    // Fusion
    m.def("lift_detection", &lift_detection, py::arg("detection"), py::arg("tessellation"), py::arg("width"),
          py::arg("height"));
    m.def("cyclic_iou", py::overload_cast<const Box&, const Box&, int>(&cyclic_iou), py::arg("a"), py::arg("b"),
          py::arg("width"));
    m.def("planar_iou", &planar_iou, py::arg("a"), py::arg("b"));
    m.def(
        "spherical_nms",
        [](const std::vector<Detection>& dets, double iou_threshold, int width, bool merge) {
            return spherical_nms(dets, iou_threshold, width, merge ? NmsMode::merge : NmsMode::discard);
        },
        py::arg("detections"), py::arg("iou_threshold") = kDefaultIouThreshold, py::arg("width"),
        py::arg("merge") = false);
    m.def("planar_nms", &planar_nms, py::arg("detections"), py::arg("iou_threshold") = kDefaultIouThreshold);
    m.def("rotate_detections", &rotate_detections, py::arg("detections"), py::arg("delta_lon"), py::arg("width"));

    // Blur
    m.def(
        "distortion_map",
        [](int height, double stretch_max) { return py::array(py::cast(compute_distortion_map(height, stretch_max).stretch)); },
        py::arg("height"), py::arg("stretch_max") = kDefaultStretchMax);
    m.def(
        "global_blur",
        [](const FloatArray& img, bool compensate, const std::string& statistic, double grad_threshold,
           double stretch_max) {
            BlurOptions o;
            o.compensate = compensate;
            o.grad_threshold = grad_threshold;
            o.stretch_max = stretch_max;
            if (statistic == "mean") {
                o.statistic = BlurStatistic::mean;
            } else if (statistic == "median") {
                o.statistic = BlurStatistic::median;
            } else {
                throw std::domain_error("statistic must be 'mean' or 'median'");
            }
            const Image src = to_image(img);
            BlurReport r;
            {
                py::gil_scoped_release release;
                r = global_blur(src, o);
            }
            return report_dict(r);
        },
        py::arg("image"), py::arg("compensate") = true, py::arg("statistic") = "mean",
        py::arg("grad_threshold") = kDefaultGradThreshold, py::arg("stretch_max") = kDefaultStretchMax);

    // Files
    m.def(
        "read_png", [](const std::filesystem::path& p) { return to_array(read_png(p)); }, py::arg("path"));
    m.def(
        "write_png", [](const std::filesystem::path& p, const FloatArray& img) { write_png(p, to_image(img)); },
        py::arg("path"), py::arg("image"));
    m.def("read_tessellation", &read_tessellation, py::arg("path"));
    m.def("write_tessellation", &write_tessellation, py::arg("path"), py::arg("tessellation"));
}
