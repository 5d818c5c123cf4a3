#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gest {

/// Axis-aligned box in pixel coordinates, (x1, y1) top-left, (x2, y2) bottom-right.
struct BBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double cx() const { return 0.5 * (x1 + x2); }
    double cy() const { return 0.5 * (y1 + y2); }
    double diagonal() const { return std::hypot(width(), height()); }
    bool well_formed() const { return x1 <= x2 && y1 <= y2 && x1 >= 0.0 && y1 >= 0.0; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct VideoMeta {
    std::string video_id;
    double fps = 30.0;
    int width = 0;
    int height = 0;
    std::optional<std::string> scene_label;

    friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

/// One pixel sample from a person mask. hue in [0,360), saturation and value in [0,1].
struct HsvSample {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;

    friend bool operator==(const HsvSample&, const HsvSample&) = default;
};

struct PersonDetection {
    int track_id = 0;
    BBox bbox;
    std::optional<double> mean_depth;
    std::vector<HsvSample> pixel_samples;

    friend bool operator==(const PersonDetection&, const PersonDetection&) = default;
};

struct ActionDetection {
    int track_id = 0;
    std::string label;
    double confidence = 0.0;
    BBox bbox;

    friend bool operator==(const ActionDetection&, const ActionDetection&) = default;
};

enum class ObjectSource { detector, segmentation };

struct ObjectDetection {
    std::string label;
    BBox bbox;
    std::optional<double> mean_depth;
    ObjectSource source = ObjectSource::detector;

    friend bool operator==(const ObjectDetection&, const ObjectDetection&) = default;
};

struct FrameRecord {
    int frame_index = 0;
    std::vector<PersonDetection> persons;
    std::vector<ActionDetection> actions;
    std::vector<ObjectDetection> objects;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

double iou(const BBox& a, const BBox& b);

/// True when the boxes share any point, boundary contact included.
bool touches(const BBox& a, const BBox& b);

}  // namespace gest
