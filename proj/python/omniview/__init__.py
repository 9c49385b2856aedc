"""Viewport tessellation, seam-aware detection fusion and blur measurement
for equirectangular (360 x 180 degree) images.

Images are float32 numpy arrays with values in [0, 1], shaped (H, W) or (H, W, 3).
"""

from ._core import (
    Box,
    Detection,
    FormatError,
    IoError,
    SphereDir,
    Tessellation,
    Viewport,
    ViewportDetection,
    angular_distance,
    blend,
    coverage_fraction,
    coverage_map,
    cyclic_iou,
    dir_to_equirect,
    distortion_map,
    equirect_to_dir,
    global_blur,
    gnomonic_forward,
    gnomonic_inverse,
    lift_detection,
    make_tessellation,
    matched_viewport_size,
    planar_iou,
    planar_nms,
    prepare_detector_input,
    psnr,
    read_png,
    read_tessellation,
    render_viewport,
    render_viewports,
    rotate_detections,
    spherical_nms,
    viewports_containing,
    vogel_points,
    write_png,
    write_tessellation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
