#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pancake/geom.hpp"
#include "pancake/mask.hpp"

namespace pancake {

struct PixelCoord {
    int x = 0;
    int y = 0;
    friend bool operator==(PixelCoord a, PixelCoord b) { return a.x == b.x && a.y == b.y; }
    friend bool operator<(PixelCoord a, PixelCoord b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;  // row-major scan order
    }
};

using PixelPath = std::vector<PixelCoord>;

// Closed boundary loops for a filled shape, outermost first. Loop k traces
// the contour(s) of the mask eroded by ceil(w/2) + k*w, so each deposited
// swath of width w stays inside the original shape. Holes contribute their
// own loops. Requires an Enclosed mask.
std::vector<PixelPath> concentric_loops(const BinaryMask& mask, int stroke_width_px);

// All boundary contours (outer and hole) of a mask, deterministic order.
std::vector<PixelPath> trace_contours(const BinaryMask& mask);

// Zhang-Suen thinning to a one-pixel-wide skeleton. Subset of the input,
// idempotent, and keeps the 8-connected component count.
BinaryMask skeletonize(const BinaryMask& mask);

struct SkeletonEdge {
    int a = 0;  // node indices, a < b
    int b = 0;
    double weight = 0.0;  // 1 for orthogonal, sqrt(2) for diagonal steps
};

struct SkeletonGraph {
    std::vector<PixelCoord> nodes;  // lexicographic pixel order
    std::vector<SkeletonEdge> edges;
};

SkeletonGraph build_graph(const BinaryMask& skeleton);

// Minimum spanning forest with deterministic lexicographic tie-breaking.
SkeletonGraph mst_refine(const SkeletonGraph& graph);

// Decomposes an acyclic graph into strokes by repeatedly peeling off the
// longest remaining path. Every tree edge appears in exactly one stroke;
// isolated nodes become single-pixel dabs.
std::vector<PixelPath> tree_to_strokes(const SkeletonGraph& tree);

struct Stroke {
    std::vector<Vec2> points;  // world coordinates, metres
    bool closed = false;       // closing segment implied, last != first
};

struct Trajectory {
    std::vector<Stroke> strokes;
    double stroke_width = 0.0;  // metres
};

// Pixel path to world coordinates: optional Douglas-Peucker simplification
// (tolerance in pixels, 0 disables), then p_world = origin + scale * p_px.
Stroke to_world(const PixelPath& path, bool closed, double scale, Vec2 plate_origin,
                double simplify_tolerance_px = 0.5);

std::vector<Vec2> douglas_peucker(const std::vector<Vec2>& pts, double tolerance);

// Full pipeline: classify (or force a mode), then loops or skeleton strokes.
enum class PlanMode { Auto, Enclosed, OpenLines };

Trajectory plan_trajectory(const BinaryMask& mask, int stroke_width_px,
                           PlanMode mode = PlanMode::Auto, Vec2 plate_origin = {0.0, 0.0});

void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);
void save_trajectory_svg(const Trajectory& traj, const std::string& path);

}  // namespace pancake
