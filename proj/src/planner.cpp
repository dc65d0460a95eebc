#include "pancake/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "pancake/errors.hpp"

namespace pancake {

namespace {

// Clockwise Moore neighbourhood in image coordinates (y down).
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_from_to(PixelCoord from, PixelCoord to) {
    for (int d = 0; d < 8; ++d)
        if (from.x + kDx[d] == to.x && from.y + kDy[d] == to.y) return d;
    throw std::logic_error("pixels are not neighbours");
}

// Moore boundary tracing with Jacob's stopping criterion. `start` is a
// foreground pixel and `backtrack` an adjacent background pixel on the
// boundary being traced.
PixelPath trace_from(const BinaryMask& mask, PixelCoord start, PixelCoord backtrack) {
    PixelPath path{start};

    // isolated pixel: no neighbours to walk to
    bool has_neighbour = false;
    for (int d = 0; d < 8; ++d)
        if (mask.at(start.x + kDx[d], start.y + kDy[d])) has_neighbour = true;
    if (!has_neighbour) return path;

    PixelCoord cur = start;
    PixelCoord back = backtrack;
    PixelCoord first_next{-1, -1};
    for (std::size_t steps = 0;; ++steps) {
        const int back_dir = direction_from_to(cur, back);
        int found = -1;
        for (int i = 1; i <= 8; ++i) {
            const int d = (back_dir + i) % 8;
            const PixelCoord n{cur.x + kDx[d], cur.y + kDy[d]};
            if (mask.at(n.x, n.y)) {
                found = d;
                break;
            }
            back = n;  // last background cell checked
        }
        if (found < 0) break;
        const PixelCoord next{cur.x + kDx[found], cur.y + kDy[found]};
        // the trace is deterministic, so repeating the first move means
        // the contour has closed
        if (steps == 0) {
            first_next = next;
        } else if (cur == start && next == first_next) {
            break;
        }
        path.push_back(next);
        cur = next;
        if (path.size() > 4 * mask.pixels.size() + 8)
            throw std::logic_error("contour trace diverged");
    }
    // drop a duplicated closing vertex when the trace re-entered the start
    if (path.size() > 1 && path.back() == path.front()) path.pop_back();
    return path;
}

// 4-connected background labelling; label 0 is the region touching the border.
std::vector<int> label_background(const BinaryMask& mask, int& n_labels) {
    const int w = mask.width, h = mask.height;
    std::vector<int> labels(static_cast<size_t>(w) * h, -1);
    n_labels = 1;  // label 0 is reserved for border-connected background
    std::vector<std::pair<int, int>> stack;

    auto flood = [&](int sx, int sy, int lab) {
        labels[static_cast<size_t>(sy) * w + sx] = lab;
        stack.push_back({sx, sy});
        while (!stack.empty()) {
            auto [x, y] = stack.back();
            stack.pop_back();
            constexpr int ddx[4] = {1, -1, 0, 0};
            constexpr int ddy[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int nx = x + ddx[k], ny = y + ddy[k];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                if (mask.at(nx, ny)) continue;
                auto& lab2 = labels[static_cast<size_t>(ny) * w + nx];
                if (lab2 == -1) {
                    lab2 = lab;
                    stack.push_back({nx, ny});
                }
            }
        }
    };

    // border-connected background first so it always gets label 0
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            if (!border || mask.at(x, y)) continue;
            if (labels[static_cast<size_t>(y) * w + x] == -1) flood(x, y, 0);
        }
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (!mask.at(x, y) && labels[static_cast<size_t>(y) * w + x] == -1)
                flood(x, y, n_labels++);
    return labels;
}

}  // namespace

std::vector<PixelPath> trace_contours(const BinaryMask& mask) {
    std::vector<PixelPath> contours;

    // outer contour per foreground component, ordered by first scan pixel
    const auto [fg_labels, n_fg] = label_components(mask);
    std::vector<bool> seen(static_cast<size_t>(n_fg), false);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            const int lab = fg_labels[static_cast<size_t>(y) * mask.width + x];
            if (seen[static_cast<size_t>(lab)]) continue;
            seen[static_cast<size_t>(lab)] = true;
            contours.push_back(trace_from(mask, {x, y}, {x - 1, y}));
        }
    }

    // one contour around each hole, ordered by the hole's first scan pixel
    int n_bg = 0;
    const auto bg_labels = label_background(mask, n_bg);
    std::vector<bool> hole_seen(static_cast<size_t>(std::max(n_bg, 1)), false);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y)) continue;
            const int lab = bg_labels[static_cast<size_t>(y) * mask.width + x];
            if (lab == 0 || hole_seen[static_cast<size_t>(lab)]) continue;
            hole_seen[static_cast<size_t>(lab)] = true;
            // pixel above the topmost hole pixel is foreground by construction
            contours.push_back(trace_from(mask, {x, y - 1}, {x, y}));
        }
    }
    return contours;
}

std::vector<PixelPath> concentric_loops(const BinaryMask& mask, int stroke_width_px) {
    if (classify_shape(mask, stroke_width_px) != ShapeKind::Enclosed)
        throw std::invalid_argument("concentric loops require an enclosed shape");

    const int inset = (stroke_width_px + 1) / 2;  // keep the swath inside the shape
    std::vector<PixelPath> loops;
    BinaryMask last = mask;
    for (int k = 0;; ++k) {
        const BinaryMask level = erode(mask, inset + k * stroke_width_px);
        if (level.empty_mask()) break;
        for (auto& contour : trace_contours(level)) loops.push_back(std::move(contour));
        last = level;
    }
    // Stepping by a full stroke width can strand a band thinner than a
    // stroke between the last two levels (an annulus does this). Keep
    // insetting by half-widths until every remaining pixel is reachable.
    while (!erode(last, inset + 1).empty_mask()) {
        const BinaryMask band = erode(last, inset);
        for (auto& contour : trace_contours(band)) loops.push_back(std::move(contour));
        last = band;
    }
    return loops;
}

namespace {

// Zhang-Suen neighbourhood, P2..P9 clockwise from north.
struct Neighbourhood {
    bool p[10];
    int transitions() const {
        int a = 0;
        for (int i = 2; i <= 9; ++i) {
            const bool cur = p[i];
            const bool next = p[i == 9 ? 2 : i + 1];
            if (!cur && next) ++a;
        }
        return a;
    }
    int count() const {
        int b = 0;
        for (int i = 2; i <= 9; ++i) b += p[i];
        return b;
    }
};

Neighbourhood neighbourhood(const BinaryMask& m, int x, int y) {
    Neighbourhood nb{};
    nb.p[2] = m.at(x, y - 1);
    nb.p[3] = m.at(x + 1, y - 1);
    nb.p[4] = m.at(x + 1, y);
    nb.p[5] = m.at(x + 1, y + 1);
    nb.p[6] = m.at(x, y + 1);
    nb.p[7] = m.at(x - 1, y + 1);
    nb.p[8] = m.at(x - 1, y);
    nb.p[9] = m.at(x - 1, y - 1);
    return nb;
}

// One parallel subiteration; pass = 0 or 1. Deletions that would erase an
// entire component are held back by keeping its first pixel: thinning must
// not change the component count.
bool zhang_suen_pass(BinaryMask& m, int pass) {
    std::vector<PixelCoord> kill;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            const auto nb = neighbourhood(m, x, y);
            const int b = nb.count();
            if (b < 2 || b > 6) continue;
            if (nb.transitions() != 1) continue;
            if (pass == 0) {
                if (nb.p[2] && nb.p[4] && nb.p[6]) continue;
                if (nb.p[4] && nb.p[6] && nb.p[8]) continue;
            } else {
                if (nb.p[2] && nb.p[4] && nb.p[8]) continue;
                if (nb.p[2] && nb.p[6] && nb.p[8]) continue;
            }
            kill.push_back({x, y});
        }
    }
    if (kill.empty()) return false;

    const auto [labels, n_comp] = label_components(m);
    std::vector<int> remaining(static_cast<size_t>(n_comp), 0);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) ++remaining[static_cast<size_t>(labels[static_cast<size_t>(y) * m.width + x])];

    bool changed = false;
    for (const auto& px : kill) {
        auto& left = remaining[static_cast<size_t>(labels[static_cast<size_t>(px.y) * m.width + px.x])];
        if (left <= 1) continue;  // never delete a component's last pixel
        --left;
        m.set(px.x, px.y, false);
        changed = true;
    }
    return changed;
}

// Sequential cleanup of leftover 2x2 blocks (a known Zhang-Suen artifact):
// delete block pixels that are still simple points.
bool clear_square_blocks(BinaryMask& m) {
    bool changed = false;
    for (int y = 0; y + 1 < m.height; ++y) {
        for (int x = 0; x + 1 < m.width; ++x) {
            if (!(m.at(x, y) && m.at(x + 1, y) && m.at(x, y + 1) && m.at(x + 1, y + 1))) continue;
            const PixelCoord corners[4] = {{x, y}, {x + 1, y}, {x, y + 1}, {x + 1, y + 1}};
            for (const auto& c : corners) {
                const auto nb = neighbourhood(m, c.x, c.y);
                const int b = nb.count();
                if (b >= 2 && b <= 6 && nb.transitions() == 1) {
                    m.set(c.x, c.y, false);
                    changed = true;
                    break;
                }
            }
        }
    }
    return changed;
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& mask) {
    if (mask.empty_mask()) throw std::invalid_argument("cannot skeletonize an empty mask");
    BinaryMask m = mask;
    // run to a global fixed point so a second call is a no-op
    while (true) {
        bool changed = false;
        while (true) {
            bool pass_changed = zhang_suen_pass(m, 0);
            pass_changed |= zhang_suen_pass(m, 1);
            changed |= pass_changed;
            if (!pass_changed) break;
        }
        if (!clear_square_blocks(m) && !changed) break;
    }
    return m;
}

SkeletonGraph build_graph(const BinaryMask& skeleton) {
    SkeletonGraph g;
    std::vector<int> node_id(skeleton.pixels.size(), -1);
    for (int y = 0; y < skeleton.height; ++y)
        for (int x = 0; x < skeleton.width; ++x)
            if (skeleton.at(x, y)) {
                node_id[static_cast<size_t>(y) * skeleton.width + x] =
                    static_cast<int>(g.nodes.size());
                g.nodes.push_back({x, y});
            }
    if (g.nodes.empty()) throw std::invalid_argument("empty skeleton graph");

    const double sqrt2 = std::sqrt(2.0);
    for (int y = 0; y < skeleton.height; ++y) {
        for (int x = 0; x < skeleton.width; ++x) {
            if (!skeleton.at(x, y)) continue;
            const int a = node_id[static_cast<size_t>(y) * skeleton.width + x];
            // forward half of the 8-neighbourhood: each edge stored once
            constexpr int fdx[4] = {1, -1, 0, 1};
            constexpr int fdy[4] = {0, 1, 1, 1};
            for (int k = 0; k < 4; ++k) {
                const int nx = x + fdx[k], ny = y + fdy[k];
                if (!skeleton.at(nx, ny)) continue;
                const int b = node_id[static_cast<size_t>(ny) * skeleton.width + nx];
                g.edges.push_back({a, b, (fdx[k] != 0 && fdy[k] != 0) ? sqrt2 : 1.0});
            }
        }
    }
    return g;
}

namespace {

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[static_cast<size_t>(b)] = a;
        return true;
    }
};

}  // namespace

SkeletonGraph mst_refine(const SkeletonGraph& graph) {
    if (graph.nodes.empty()) throw std::invalid_argument("empty skeleton graph");
    SkeletonGraph out;
    out.nodes = graph.nodes;

    std::vector<SkeletonEdge> edges = graph.edges;
    // Kruskal; ties broken by lexicographic pixel order of the endpoints so
    // runs are reproducible.
    std::sort(edges.begin(), edges.end(), [&](const SkeletonEdge& e1, const SkeletonEdge& e2) {
        if (e1.weight != e2.weight) return e1.weight < e2.weight;
        const auto k1 = std::make_pair(graph.nodes[static_cast<size_t>(e1.a)],
                                       graph.nodes[static_cast<size_t>(e1.b)]);
        const auto k2 = std::make_pair(graph.nodes[static_cast<size_t>(e2.a)],
                                       graph.nodes[static_cast<size_t>(e2.b)]);
        return k1 < k2;
    });

    Dsu dsu(static_cast<int>(graph.nodes.size()));
    for (const auto& e : edges)
        if (dsu.unite(e.a, e.b)) out.edges.push_back(e);
    return out;
}

namespace {

struct TreeAdj {
    std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbour, weight)
    explicit TreeAdj(const SkeletonGraph& g) : adj(g.nodes.size()) {
        for (const auto& e : g.edges) {
            adj[static_cast<size_t>(e.a)].push_back({e.b, e.weight});
            adj[static_cast<size_t>(e.b)].push_back({e.a, e.weight});
        }
        for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    }
};

// farthest node from src within the remaining edge set, smallest node index
// on ties; returns (node, parent chain)
std::pair<int, std::vector<int>> farthest_from(const TreeAdj& tree,
                                               const std::vector<std::vector<bool>>& alive, int src) {
    const int n = static_cast<int>(tree.adj.size());
    std::vector<double> dist(static_cast<size_t>(n), -1.0);
    std::vector<int> parent(static_cast<size_t>(n), -1);
    std::vector<int> stack{src};
    dist[static_cast<size_t>(src)] = 0.0;
    int best = src;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (size_t k = 0; k < tree.adj[static_cast<size_t>(u)].size(); ++k) {
            if (!alive[static_cast<size_t>(u)][k]) continue;
            const auto [v, w] = tree.adj[static_cast<size_t>(u)][k];
            if (dist[static_cast<size_t>(v)] >= 0.0) continue;
            dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + w;
            parent[static_cast<size_t>(v)] = u;
            stack.push_back(v);
        }
    }
    for (int v = 0; v < n; ++v) {
        if (dist[static_cast<size_t>(v)] < 0.0) continue;
        if (dist[static_cast<size_t>(v)] > dist[static_cast<size_t>(best)] + 1e-12) best = v;
    }
    return {best, parent};
}

}  // namespace

std::vector<PixelPath> tree_to_strokes(const SkeletonGraph& tree) {
    // cycle check: a forest has fewer edges than nodes per component
    {
        Dsu dsu(static_cast<int>(tree.nodes.size()));
        for (const auto& e : tree.edges)
            if (!dsu.unite(e.a, e.b)) throw std::invalid_argument("stroke extraction needs an acyclic graph");
    }

    TreeAdj adj(tree);
    const int n = static_cast<int>(tree.nodes.size());
    std::vector<std::vector<bool>> alive(static_cast<size_t>(n));
    std::vector<int> degree(static_cast<size_t>(n), 0);
    for (int u = 0; u < n; ++u) {
        alive[static_cast<size_t>(u)].assign(adj.adj[static_cast<size_t>(u)].size(), true);
        degree[static_cast<size_t>(u)] = static_cast<int>(adj.adj[static_cast<size_t>(u)].size());
    }

    auto kill_edge = [&](int u, int v) {
        for (size_t k = 0; k < adj.adj[static_cast<size_t>(u)].size(); ++k)
            if (adj.adj[static_cast<size_t>(u)][k].first == v) alive[static_cast<size_t>(u)][k] = false;
        for (size_t k = 0; k < adj.adj[static_cast<size_t>(v)].size(); ++k)
            if (adj.adj[static_cast<size_t>(v)][k].first == u) alive[static_cast<size_t>(v)][k] = false;
        --degree[static_cast<size_t>(u)];
        --degree[static_cast<size_t>(v)];
    };

    std::vector<PixelPath> strokes;
    std::vector<bool> emitted(static_cast<size_t>(n), false);

    while (true) {
        // seed: first node (pixel order) that still has live edges
        int seed = -1;
        for (int u = 0; u < n; ++u)
            if (degree[static_cast<size_t>(u)] > 0) {
                seed = u;
                break;
            }
        if (seed == -1) break;

        const auto [a, p1] = farthest_from(adj, alive, seed);
        const auto [b, p2] = farthest_from(adj, alive, a);
        // reconstruct a -> b
        PixelPath stroke;
        std::vector<int> chain;
        for (int v = b; v != -1; v = p2[static_cast<size_t>(v)]) chain.push_back(v);
        std::reverse(chain.begin(), chain.end());  // starts at a
        for (size_t i = 0; i < chain.size(); ++i) {
            stroke.push_back(tree.nodes[static_cast<size_t>(chain[i])]);
            emitted[static_cast<size_t>(chain[i])] = true;
            if (i + 1 < chain.size()) kill_edge(chain[i], chain[i + 1]);
        }
        strokes.push_back(std::move(stroke));
    }

    // isolated pixels (dots in the artwork) still deserve a dab of batter
    for (int u = 0; u < n; ++u)
        if (!emitted[static_cast<size_t>(u)] && adj.adj[static_cast<size_t>(u)].empty())
            strokes.push_back({tree.nodes[static_cast<size_t>(u)]});

    return strokes;
}

std::vector<Vec2> douglas_peucker(const std::vector<Vec2>& pts, double tolerance) {
    if (pts.size() <= 2) return pts;
    std::vector<bool> keep(pts.size(), false);
    keep.front() = keep.back() = true;
    std::vector<std::pair<size_t, size_t>> stack{{0, pts.size() - 1}};
    while (!stack.empty()) {
        auto [lo, hi] = stack.back();
        stack.pop_back();
        if (hi <= lo + 1) continue;
        double worst = -1.0;
        size_t worst_i = lo;
        for (size_t i = lo + 1; i < hi; ++i) {
            const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
            if (d > worst) {
                worst = d;
                worst_i = i;
            }
        }
        if (worst > tolerance) {
            keep[worst_i] = true;
            stack.push_back({lo, worst_i});
            stack.push_back({worst_i, hi});
        }
    }
    std::vector<Vec2> out;
    for (size_t i = 0; i < pts.size(); ++i)
        if (keep[i]) out.push_back(pts[i]);
    return out;
}

Stroke to_world(const PixelPath& path, bool closed, double scale, Vec2 plate_origin,
                double simplify_tolerance_px) {
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
    std::vector<Vec2> px;
    px.reserve(path.size());
    for (const auto& p : path) px.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});

    if (simplify_tolerance_px > 0.0 && px.size() > 2) {
        if (closed) {
            // keep the implied closing edge honest by simplifying around it
            px.push_back(px.front());
            px = douglas_peucker(px, simplify_tolerance_px);
            if (px.size() > 1 && px.back().x == px.front().x && px.back().y == px.front().y)
                px.pop_back();
        } else {
            px = douglas_peucker(px, simplify_tolerance_px);
        }
    }

    Stroke s;
    s.closed = closed;
    s.points.reserve(px.size());
    for (const auto& p : px) s.points.push_back(plate_origin + scale * p);
    // drop consecutive duplicates introduced by quantized tracing
    s.points.erase(std::unique(s.points.begin(), s.points.end(),
                               [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
                   s.points.end());
    return s;
}

Trajectory plan_trajectory(const BinaryMask& mask, int stroke_width_px, PlanMode mode,
                           Vec2 plate_origin) {
    if (mask.empty_mask()) throw std::invalid_argument("cannot plan from an empty mask");
    ShapeKind kind;
    switch (mode) {
        case PlanMode::Enclosed: kind = ShapeKind::Enclosed; break;
        case PlanMode::OpenLines: kind = ShapeKind::OpenLines; break;
        default: kind = classify_shape(mask, stroke_width_px); break;
    }

    Trajectory traj;
    traj.stroke_width = stroke_width_px * mask.scale;

    if (kind == ShapeKind::Enclosed) {
        for (const auto& loop : concentric_loops(mask, stroke_width_px)) {
            Stroke s = to_world(loop, true, mask.scale, plate_origin);
            if (s.points.size() >= 2) traj.strokes.push_back(std::move(s));
        }
    } else {
        const BinaryMask skel = skeletonize(mask);
        const SkeletonGraph tree = mst_refine(build_graph(skel));
        for (const auto& path : tree_to_strokes(tree)) {
            PixelPath p = path;
            if (p.size() == 1) p.push_back({p[0].x + 1, p[0].y});  // dab for isolated dots
            Stroke s = to_world(p, false, mask.scale, plate_origin);
            if (s.points.size() < 2) continue;
            // thinning pulls the ends of a thick line inward; overshoot each
            // end by half a width so the swath reaches the drawn line's caps
            if (polyline_length(s.points) >= traj.stroke_width) {
                const double ext = traj.stroke_width / 2.0;
                Vec2& first = s.points.front();
                const Vec2 d0 = first - s.points[1];
                const double l0 = norm(d0);
                if (l0 > 0.0) first = first + (ext / l0) * d0;
                Vec2& last = s.points.back();
                const Vec2 d1 = last - s.points[s.points.size() - 2];
                const double l1 = norm(d1);
                if (l1 > 0.0) last = last + (ext / l1) * d1;
            }
            traj.strokes.push_back(std::move(s));
        }
    }
    if (traj.strokes.empty()) throw std::runtime_error("planning produced no strokes");
    return traj;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
    nlohmann::json j;
    j["stroke_width_m"] = traj.stroke_width;
    auto& strokes = j["strokes"] = nlohmann::json::array();
    for (const auto& s : traj.strokes) {
        nlohmann::json js;
        js["closed"] = s.closed;
        auto& pts = js["points"] = nlohmann::json::array();
        for (const auto& p : s.points) pts.push_back({p.x, p.y});
        strokes.push_back(std::move(js));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    Trajectory traj;
    traj.stroke_width = j.at("stroke_width_m").get<double>();
    for (const auto& js : j.at("strokes")) {
        Stroke s;
        s.closed = js.at("closed").get<bool>();
        for (const auto& p : js.at("points")) s.points.push_back({p.at(0), p.at(1)});
        if (s.points.size() < 2) throw std::runtime_error(path + ": stroke with fewer than 2 points");
        traj.strokes.push_back(std::move(s));
    }
    return traj;
}

void save_trajectory_svg(const Trajectory& traj, const std::string& path) {
    double max_x = 0.0, max_y = 0.0;
    for (const auto& s : traj.strokes)
        for (const auto& p : s.points) {
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
        }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const double mm = 1000.0;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << (max_x + 0.01) * mm
        << " " << (max_y + 0.01) * mm << "\">\n";
    for (const auto& s : traj.strokes) {
        out << (s.closed ? "<polygon" : "<polyline") << " fill=\"none\" stroke=\"#b5651d\""
            << " stroke-width=\"" << traj.stroke_width * mm << "\" stroke-linecap=\"round\""
            << " stroke-linejoin=\"round\" points=\"";
        for (const auto& p : s.points) out << p.x * mm << "," << p.y * mm << " ";
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace pancake
