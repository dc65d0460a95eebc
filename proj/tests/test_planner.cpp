#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "pancake/planner.hpp"
#include <stdexcept>

using namespace pancake;

namespace {

BinaryMask disk_mask(int size, double radius) {
    BinaryMask m = make_mask(size, size);
    const double c = size / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (std::hypot(x - c, y - c) <= radius) m.set(x, y, true);
    return m;
}

BinaryMask annulus_mask(int size, double r_outer, double r_inner) {
    BinaryMask m = make_mask(size, size);
    const double c = size / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double d = std::hypot(x - c, y - c);
            if (d <= r_outer && d >= r_inner) m.set(x, y, true);
        }
    return m;
}

double mean_radius(const PixelPath& loop, double cx, double cy) {
    double acc = 0.0;
    for (const auto& p : loop) acc += std::hypot(p.x - cx, p.y - cy);
    return acc / static_cast<double>(loop.size());
}

int count_components(const BinaryMask& m) { return label_components(m).second; }

bool is_thin(const BinaryMask& m) {
    for (int y = 0; y + 1 < m.height; ++y)
        for (int x = 0; x + 1 < m.width; ++x)
            if (m.at(x, y) && m.at(x + 1, y) && m.at(x, y + 1) && m.at(x + 1, y + 1)) return false;
    return true;
}

// winding-number point-in-polygon on pixel loops
bool inside_loop(const PixelPath& loop, double px, double py) {
    bool in = false;
    for (size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
        const double xi = loop[i].x, yi = loop[i].y, xj = loop[j].x, yj = loop[j].y;
        if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
    }
    return in;
}

}  // namespace

TEST_CASE("concentric loops on the disk fixture") {
    const BinaryMask m = disk_mask(100, 40.0);
    const auto loops = concentric_loops(m, 10);
    REQUIRE(loops.size() == 4);
    const double expected[] = {35.0, 25.0, 15.0, 5.0};
    for (size_t k = 0; k < 4; ++k)
        CHECK(std::abs(mean_radius(loops[k], 50.0, 50.0) - expected[k]) <= 1.0);
}

TEST_CASE("each inner loop lies inside the previous one") {
    const BinaryMask m = disk_mask(100, 40.0);
    const auto loops = concentric_loops(m, 10);
    for (size_t k = 1; k < loops.size(); ++k)
        for (const auto& p : loops[k])
            CHECK(inside_loop(loops[k - 1], p.x, p.y));
}

TEST_CASE("annulus produces loops for both boundary components") {
    const BinaryMask m = annulus_mask(120, 40.0, 20.0);
    const auto loops = concentric_loops(m, 10);
    REQUIRE(loops.size() == 2);
    // outer boundary inset by 5, hole boundary pushed out by 5
    CHECK(mean_radius(loops[0], 60.0, 60.0) == doctest::Approx(35.0).epsilon(0.05));
    CHECK(mean_radius(loops[1], 60.0, 60.0) == doctest::Approx(25.0).epsilon(0.05));
}

TEST_CASE("a shape one stroke wide yields a single loop") {
    const BinaryMask m = disk_mask(60, 10.0);
    const auto loops = concentric_loops(m, 10);
    CHECK(loops.size() == 1);
}

TEST_CASE("open shapes are rejected by the loop generator") {
    BinaryMask thin = make_mask(60, 60);
    for (int x = 5; x < 55; ++x) thin.set(x, 30, true);
    CHECK_THROWS_AS(concentric_loops(thin, 8), std::invalid_argument);
}

TEST_CASE("skeletonization") {
    SUBCASE("a wide bar thins to a single-pixel line") {
        BinaryMask m = make_mask(80, 20);
        for (int y = 7; y < 12; ++y)
            for (int x = 5; x < 75; ++x) m.set(x, y, true);
        const BinaryMask s = skeletonize(m);
        CHECK(is_thin(s));
        CHECK(count_components(s) == 1);
        int min_x = 80, max_x = -1;
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 80; ++x)
                if (s.at(x, y)) {
                    CHECK(m.at(x, y));  // subset of the input
                    min_x = std::min(min_x, x);
                    max_x = std::max(max_x, x);
                }
        CHECK(max_x - min_x >= 60);  // spans most of the bar
    }
    SUBCASE("an existing one-pixel line is a fixed point") {
        BinaryMask m = make_mask(40, 10);
        for (int x = 3; x < 37; ++x) m.set(x, 5, true);
        const BinaryMask s = skeletonize(m);
        CHECK(s.pixels == m.pixels);
    }
    SUBCASE("thinning is idempotent") {
        const BinaryMask m = disk_mask(60, 18.0);
        const BinaryMask once = skeletonize(m);
        const BinaryMask twice = skeletonize(once);
        CHECK(once.pixels == twice.pixels);
    }
    SUBCASE("component count is preserved") {
        BinaryMask m = make_mask(100, 60);
        for (int y = 10; y < 18; ++y)
            for (int x = 10; x < 40; ++x) m.set(x, y, true);  // bar
        for (int y = 30; y < 50; ++y)
            for (int x = 60; x < 80; ++x) m.set(x, y, true);  // block
        m.set(50, 55, true);                                  // lone pixel
        m.set(51, 55, true);
        m.set(50, 56, true);
        m.set(51, 56, true);                                  // 2x2 blob
        REQUIRE(count_components(m) == 3);
        const BinaryMask s = skeletonize(m);
        CHECK(count_components(s) == 3);
        CHECK(is_thin(s));
    }
}

TEST_CASE("skeleton graph and spanning forest") {
    SUBCASE("a ring loses exactly one edge") {
        const BinaryMask ring = skeletonize(annulus_mask(60, 20.0, 16.0));
        const SkeletonGraph g = build_graph(ring);
        const std::size_t n = g.nodes.size();
        CHECK(g.edges.size() >= n);  // at least one cycle
        const SkeletonGraph t = mst_refine(g);
        CHECK(t.edges.size() == n - 1);
    }
    SUBCASE("a tree passes through unchanged") {
        // a horizontal run with a diagonal run off its end: acyclic even
        // under 8-adjacency (orthogonal junctions would form triangles)
        BinaryMask m = make_mask(40, 30);
        for (int x = 3; x < 25; ++x) m.set(x, 10, true);
        for (int k = 1; k < 10; ++k) m.set(24 + k, 10 + k, true);
        const SkeletonGraph g = build_graph(m);
        const SkeletonGraph t = mst_refine(g);
        CHECK(t.edges.size() == g.edges.size());
        double gw = 0, tw = 0;
        for (const auto& e : g.edges) gw += e.weight;
        for (const auto& e : t.edges) tw += e.weight;
        CHECK(tw == doctest::Approx(gw));
    }
    SUBCASE("forest weight never exceeds graph weight") {
        const BinaryMask m = skeletonize(disk_mask(50, 15.0));
        const SkeletonGraph g = build_graph(m);
        const SkeletonGraph t = mst_refine(g);
        double gw = 0, tw = 0;
        for (const auto& e : g.edges) gw += e.weight;
        for (const auto& e : t.edges) tw += e.weight;
        CHECK(tw <= gw + 1e-12);
    }
    SUBCASE("mst is deterministic") {
        const BinaryMask ring = skeletonize(annulus_mask(48, 16.0, 12.0));
        const SkeletonGraph a = mst_refine(build_graph(ring));
        const SkeletonGraph b = mst_refine(build_graph(ring));
        REQUIRE(a.edges.size() == b.edges.size());
        for (size_t i = 0; i < a.edges.size(); ++i) {
            CHECK(a.edges[i].a == b.edges[i].a);
            CHECK(a.edges[i].b == b.edges[i].b);
        }
    }
}

TEST_CASE("stroke extraction from trees") {
    SUBCASE("a straight path is one stroke") {
        BinaryMask m = make_mask(30, 10);
        for (int x = 2; x < 28; ++x) m.set(x, 5, true);
        const auto strokes = tree_to_strokes(mst_refine(build_graph(m)));
        REQUIRE(strokes.size() == 1);
        CHECK(strokes[0].size() == 26);
    }
    SUBCASE("a Y splits into the long limb pair plus the branch") {
        BinaryMask m = make_mask(40, 40);
        for (int i = 0; i < 12; ++i) {
            m.set(20, 20 - i, true);       // stem up (12 px)
            m.set(20 - i - 1, 21 + i, true);  // left leg (12 px, diagonal)
            m.set(20 + i / 2 + 1, 21 + i / 2, true);  // short right leg
        }
        m.set(20, 20, true);
        const SkeletonGraph tree = mst_refine(build_graph(skeletonize(m)));
        const auto strokes = tree_to_strokes(tree);
        REQUIRE(strokes.size() == 2);
        CHECK(strokes[0].size() > strokes[1].size());
    }
    SUBCASE("every tree edge appears exactly once across strokes") {
        const BinaryMask skel = skeletonize(disk_mask(60, 18.0));
        const SkeletonGraph tree = mst_refine(build_graph(skel));
        const auto strokes = tree_to_strokes(tree);

        std::multiset<std::pair<std::pair<int, int>, std::pair<int, int>>> covered;
        for (const auto& s : strokes)
            for (size_t i = 1; i < s.size(); ++i) {
                auto a = std::make_pair(s[i - 1].y, s[i - 1].x);
                auto b = std::make_pair(s[i].y, s[i].x);
                covered.insert({std::min(a, b), std::max(a, b)});
            }
        std::multiset<std::pair<std::pair<int, int>, std::pair<int, int>>> expected;
        for (const auto& e : tree.edges) {
            auto a = std::make_pair(tree.nodes[e.a].y, tree.nodes[e.a].x);
            auto b = std::make_pair(tree.nodes[e.b].y, tree.nodes[e.b].x);
            expected.insert({std::min(a, b), std::max(a, b)});
        }
        CHECK(covered == expected);
    }
    SUBCASE("cyclic input is rejected") {
        const SkeletonGraph g = build_graph(skeletonize(annulus_mask(48, 16.0, 12.0)));
        bool has_cycle = false;
        {
            // the traced ring skeleton keeps its cycle
            const SkeletonGraph t = mst_refine(g);
            has_cycle = t.edges.size() < g.edges.size();
        }
        if (has_cycle) CHECK_THROWS_AS(tree_to_strokes(g), std::invalid_argument);
    }
}

TEST_CASE("world conversion") {
    SUBCASE("plain affine mapping") {
        const Stroke s = to_world({{10, 20}, {11, 20}}, false, 0.001, {0.0, 0.0}, 0.0);
        REQUIRE(s.points.size() == 2);
        CHECK(s.points[0].x == doctest::Approx(0.010));
        CHECK(s.points[0].y == doctest::Approx(0.020));
    }
    SUBCASE("collinear runs collapse to their endpoints") {
        PixelPath run;
        for (int x = 0; x < 20; ++x) run.push_back({x, 5});
        const Stroke s = to_world(run, false, 0.001, {0.0, 0.0});
        CHECK(s.points.size() == 2);
        CHECK(s.points.front().x == doctest::Approx(0.0));
        CHECK(s.points.back().x == doctest::Approx(0.019));
    }
    SUBCASE("simplification stays within tolerance of the original") {
        PixelPath wiggly;
        for (int x = 0; x < 60; ++x)
            wiggly.push_back({x, 20 + static_cast<int>(3.0 * std::sin(x / 5.0))});
        const Stroke s = to_world(wiggly, false, 1.0, {0.0, 0.0}, 0.5);
        for (const auto& orig : wiggly) {
            double best = 1e18;
            for (size_t i = 1; i < s.points.size(); ++i)
                best = std::min(best, point_segment_distance({static_cast<double>(orig.x),
                                                              static_cast<double>(orig.y)},
                                                             s.points[i - 1], s.points[i]));
            CHECK(best <= 0.5 + 1e-9);
        }
    }
}

TEST_CASE("trajectory files round-trip") {
    const BinaryMask m = disk_mask(100, 40.0);
    const Trajectory traj = plan_trajectory(m, 10);
    REQUIRE(traj.strokes.size() == 4);
    CHECK(traj.stroke_width == doctest::Approx(0.010));
    for (const auto& s : traj.strokes) {
        CHECK(s.closed);
        CHECK(s.points.size() >= 2);
    }

    const auto dir = std::filesystem::temp_directory_path() / "pancake_planner_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "traj.json").string();
    save_trajectory(traj, path);
    const Trajectory back = load_trajectory(path);
    REQUIRE(back.strokes.size() == traj.strokes.size());
    CHECK(back.stroke_width == doctest::Approx(traj.stroke_width));
    for (size_t i = 0; i < back.strokes.size(); ++i) {
        REQUIRE(back.strokes[i].points.size() == traj.strokes[i].points.size());
        CHECK(back.strokes[i].closed == traj.strokes[i].closed);
        for (size_t j = 0; j < back.strokes[i].points.size(); ++j) {
            CHECK(back.strokes[i].points[j].x == traj.strokes[i].points[j].x);
            CHECK(back.strokes[i].points[j].y == traj.strokes[i].points[j].y);
        }
    }
    save_trajectory_svg(traj, (dir / "traj.svg").string());
    CHECK(std::filesystem::file_size(dir / "traj.svg") > 100);
    std::filesystem::remove_all(dir);
}

TEST_CASE("open line art goes through skeleton planning") {
    BinaryMask m = make_mask(120, 120);
    for (int x = 10; x < 110; ++x)
        for (int dy = -2; dy <= 2; ++dy) m.set(x, 60 + dy, true);
    const Trajectory traj = plan_trajectory(m, 10);
    REQUIRE(traj.strokes.size() == 1);
    CHECK(!traj.strokes[0].closed);
    CHECK(polyline_length(traj.strokes[0].points) > 0.09);  // ~100 px at 1 mm
}
