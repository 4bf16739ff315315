#include "robopose/skeleton.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <optional>

namespace robopose {

namespace {

// Neighbour bit order P2..P9: N, NE, E, SE, S, SW, W, NW.
constexpr int kNx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

int transitions(unsigned code) {
    int a = 0;
    for (int k = 0; k < 8; ++k) {
        const bool cur = (code >> k) & 1U;
        const bool nxt = (code >> ((k + 1) % 8)) & 1U;
        if (!cur && nxt) ++a;
    }
    return a;
}

// 8-simple test for the centre pixel: one 8-component of foreground
// neighbours and one 4-component of background neighbours touching a 4-neighbour.
bool simple_point(unsigned code) {
    auto adjacent = [](int i, int j, bool four) {
        const int dx = std::abs(kNx[i] - kNx[j]);
        const int dy = std::abs(kNy[i] - kNy[j]);
        return four ? dx + dy == 1 : (dx <= 1 && dy <= 1);
    };
    auto components = [&](bool fg, bool four, bool need_4adjacent_to_centre) {
        std::array<int, 8> comp{};
        comp.fill(-1);
        int n = 0;
        int counted = 0;
        for (int s = 0; s < 8; ++s) {
            if ((((code >> s) & 1U) != 0) != fg || comp[s] >= 0) continue;
            std::array<int, 8> stack{};
            int top = 0;
            stack[top++] = s;
            comp[s] = n;
            bool touches = false;
            while (top > 0) {
                const int c = stack[--top];
                if (c % 2 == 0) touches = true;  // even indices are N, E, S, W
                for (int t = 0; t < 8; ++t) {
                    if ((((code >> t) & 1U) != 0) != fg || comp[t] >= 0 || !adjacent(c, t, four)) continue;
                    comp[t] = n;
                    stack[top++] = t;
                }
            }
            ++n;
            if (!need_4adjacent_to_centre || touches) ++counted;
        }
        return counted;
    };
    return components(true, false, false) == 1 && components(false, true, true) == 1;
}

struct Tables {
    std::array<std::uint8_t, 256> count{};
    std::array<std::uint8_t, 256> transitions{};
    std::array<bool, 256> simple{};
    // Zhang-Suen deletion conditions per sub-iteration.
    std::array<bool, 256> zs_first{};
    std::array<bool, 256> zs_second{};
};

const Tables& tables() {
    static const Tables t = [] {
        Tables t;
        for (unsigned code = 0; code < 256; ++code) {
            const int b = std::popcount(code);
            const int a = transitions(code);
            t.count[code] = static_cast<std::uint8_t>(b);
            t.transitions[code] = static_cast<std::uint8_t>(a);
            t.simple[code] = simple_point(code);
            auto p = [code](int k) { return (code >> (k - 2)) & 1U; };  // P2..P9
            const bool base = b >= 2 && b <= 6 && a == 1;
            t.zs_first[code] = base && (p(2) * p(4) * p(6)) == 0 && (p(4) * p(6) * p(8)) == 0;
            t.zs_second[code] = base && (p(2) * p(4) * p(8)) == 0 && (p(2) * p(6) * p(8)) == 0;
        }
        return t;
    }();
    return t;
}

// Grid with a one-pixel zero border so neighbour reads need no bounds checks.
class PaddedGrid {
public:
    explicit PaddedGrid(const PixelGrid& g) : w_(g.width() + 2), h_(g.height() + 2), cells_(static_cast<std::size_t>(w_) * h_, 0) {
        for (int y = 0; y < g.height(); ++y) {
            for (int x = 0; x < g.width(); ++x) cells_[idx(x + 1, y + 1)] = g.at(x, y) ? 1 : 0;
        }
        offsets_ = {-w_, -w_ + 1, 1, w_ + 1, w_, w_ - 1, -1, -w_ - 1};
    }

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
    std::uint8_t& operator[](std::size_t i) { return cells_[i]; }
    std::uint8_t operator[](std::size_t i) const { return cells_[i]; }

    unsigned code(std::size_t i) const {
        unsigned c = 0;
        for (int k = 0; k < 8; ++k) c |= static_cast<unsigned>(cells_[i + offsets_[k]]) << k;
        return c;
    }
    std::ptrdiff_t offset(int k) const { return offsets_[k]; }

    PixelGrid unpad() const {
        PixelGrid g(w_ - 2, h_ - 2);
        for (int y = 0; y < h_ - 2; ++y) {
            for (int x = 0; x < w_ - 2; ++x) g.set(x, y, cells_[idx(x + 1, y + 1)] != 0);
        }
        return g;
    }

    int width() const { return w_; }
    int height() const { return h_; }

private:
    int w_;
    int h_;
    std::vector<std::uint8_t> cells_;
    std::array<std::ptrdiff_t, 8> offsets_{};
};

}  // namespace

int neighbor_count(const PixelGrid& grid, int x, int y) {
    int n = 0;
    for (int k = 0; k < 8; ++k) n += grid.get(x + kNx[k], y + kNy[k]) ? 1 : 0;
    return n;
}

bool is_thin(const PixelGrid& grid) {
    for (int y = 0; y + 1 < grid.height(); ++y) {
        for (int x = 0; x + 1 < grid.width(); ++x) {
            if (grid.at(x, y) && grid.at(x + 1, y) && grid.at(x, y + 1) && grid.at(x + 1, y + 1)) return false;
        }
    }
    return true;
}

Skeleton skeletonize(const PixelGrid& mask) {
    const Tables& t = tables();
    PaddedGrid g(mask);
    const int pw = g.width();
    const int ph = g.height();

    // Only border pixels (a background 8-neighbour) can ever satisfy B <= 6.
    std::vector<std::uint8_t> queued(static_cast<std::size_t>(pw) * ph, 0);
    std::vector<std::size_t> candidates;
    for (int y = 1; y < ph - 1; ++y) {
        for (int x = 1; x < pw - 1; ++x) {
            const std::size_t i = g.idx(x, y);
            if (g[i] && t.count[g.code(i)] < 8) {
                candidates.push_back(i);
                queued[i] = 1;
            }
        }
    }

    // Zhang-Suen eats two-pixel diagonal strokes from their ends. A pixel whose
    // only two neighbours touch each other and are themselves on a thin stroke
    // is the end of that stroke and stays.
    auto thin_tip = [&](std::size_t i, unsigned code) {
        if (t.count[code] != 2) return false;
        for (int k = 0; k < 8; ++k) {
            if (code != ((1U << k) | (1U << ((k + 1) % 8)))) continue;
            const auto a = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + g.offset(k));
            const auto b = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + g.offset((k + 1) % 8));
            return t.count[g.code(a)] <= 4 && t.count[g.code(b)] <= 4;
        }
        return false;
    };

    std::vector<std::size_t> marked;
    std::vector<std::size_t> next;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int sub = 0; sub < 2; ++sub) {
            const auto& cond = sub == 0 ? t.zs_first : t.zs_second;
            marked.clear();
            for (std::size_t i : candidates) {
                if (g[i] && cond[g.code(i)]) marked.push_back(i);
            }
            std::size_t deleted = 0;
            for (std::size_t i : marked) {
                const unsigned code = g.code(i);
                if (!t.simple[code] || t.count[code] < 2 || thin_tip(i, code)) continue;
                g[i] = 0;
                ++deleted;
                for (int k = 0; k < 8; ++k) {
                    const std::size_t n = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + g.offset(k));
                    if (g[n] && !queued[n]) {
                        queued[n] = 1;
                        candidates.push_back(n);
                    }
                }
            }
            if (deleted == 0) continue;
            changed = true;
            next.clear();
            for (std::size_t i : candidates) {
                if (g[i]) next.push_back(i);
                else queued[i] = 0;
            }
            candidates.swap(next);
        }
    }

    // Residue: simple pixels with at least three neighbours (2x2 blocks,
    // doubled diagonals), then corners of 4-connected staircases.
    auto push_neighbours = [&](std::size_t i) {
        for (int k = 0; k < 8; ++k) {
            const std::size_t n = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + g.offset(k));
            if (g[n] && !queued[n]) {
                queued[n] = 1;
                candidates.push_back(n);
            }
        }
    };
    auto sweep = [&](auto&& removable) {
        bool any = false;
        bool again = true;
        while (again) {
            again = false;
            std::vector<std::size_t> order(candidates.begin(), candidates.end());
            std::sort(order.begin(), order.end());
            for (std::size_t i : order) {
                if (!g[i] || !removable(i)) continue;
                g[i] = 0;
                again = any = true;
                push_neighbours(i);
            }
            next.clear();
            for (std::size_t i : candidates) {
                if (g[i]) next.push_back(i);
                else queued[i] = 0;
            }
            candidates.swap(next);
        }
        return any;
    };
    auto residue = [&](std::size_t i) {
        const unsigned code = g.code(i);
        return t.simple[code] && t.count[code] >= 3;
    };
    // Exactly two neighbours that are either side by side (a one-pixel stub)
    // or the two arms of a 4-connected staircase step.
    auto corner = [&](std::size_t i) {
        const unsigned code = g.code(i);
        if (t.count[code] != 2) return false;
        for (int k = 0; k < 8; ++k) {
            if (code == ((1U << k) | (1U << ((k + 1) % 8)))) return true;
        }
        for (int k = 0; k < 8; k += 2) {
            const int k2 = (k + 2) % 8;
            if (code != ((1U << k) | (1U << k2))) continue;
            const auto a = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + g.offset(k));
            const auto b = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + g.offset(k2));
            return t.count[g.code(a)] >= 2 && t.count[g.code(b)] >= 2;
        }
        return false;
    };
    while (sweep(residue) | sweep(corner)) {
    }

    Skeleton out{g.unpad(), {}};
    out.endpoints = detect_endpoints(out.grid);
    return out;
}

int endpoint_kernel_response(const PixelGrid& skel, int x, int y) {
    int sum = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int weight = (dx == 0 && dy == 0) ? 10 : 1;
            sum += weight * (skel.get(x + dx, y + dy) ? 1 : 0);
        }
    }
    return sum;
}

std::vector<Point> detect_endpoints(const PixelGrid& skel) {
    std::vector<Point> out;
    for (int y = 0; y < skel.height(); ++y) {
        for (int x = 0; x < skel.width(); ++x) {
            if (skel.at(x, y) && endpoint_kernel_response(skel, x, y) == 11) out.push_back({x, y});
        }
    }
    return out;
}

namespace {

unsigned neighbour_code(const PixelGrid& g, Point p) {
    unsigned c = 0;
    for (int k = 0; k < 8; ++k) c |= (g.get(p.x + kNx[k], p.y + kNy[k]) ? 1U : 0U) << k;
    return c;
}

}  // namespace

PixelGrid prune_spurs(const PixelGrid& skel, int max_length) {
    if (max_length < 0) throw DomainError("spur length must be >= 0");
    PixelGrid out = skel;
    if (max_length == 0) return out;
    const Tables& t = tables();
    // Crossing number >= 3: the neighbours fall into three or more separate runs.
    auto is_junction = [&](Point p) { return t.transitions[neighbour_code(skel, p)] >= 3; };

    std::vector<std::uint8_t> seen(skel.cells().size(), 0);
    std::vector<Point> doomed;
    for (const Point& e : detect_endpoints(skel)) {
        std::vector<Point> chain{e};
        seen[skel.index(e.x, e.y)] = 1;
        Point cur = e;
        bool junction = false;
        while (static_cast<int>(chain.size()) <= max_length) {
            // Prefer the 4-neighbour when a diagonal is also open (staircase kink).
            std::optional<Point> nxt;
            for (int k = 0; k < 8 && !nxt; k += 2) {
                const Point n{cur.x + kNx[k], cur.y + kNy[k]};
                if (skel.get(n.x, n.y) && !seen[skel.index(n.x, n.y)]) nxt = n;
            }
            for (int k = 1; k < 8 && !nxt; k += 2) {
                const Point n{cur.x + kNx[k], cur.y + kNy[k]};
                if (skel.get(n.x, n.y) && !seen[skel.index(n.x, n.y)]) nxt = n;
            }
            if (!nxt) break;
            if (is_junction(*nxt)) {
                junction = true;
                break;
            }
            seen[skel.index(nxt->x, nxt->y)] = 1;
            chain.push_back(*nxt);
            cur = *nxt;
        }
        for (const Point& p : chain) seen[skel.index(p.x, p.y)] = 0;
        if (junction) doomed.insert(doomed.end(), chain.begin(), chain.end());
    }
    for (const Point& p : doomed) out.set(p, false);
    return out;
}

std::vector<Point> bresenham_line(Point a, Point b) {
    std::vector<Point> out;
    const int dx = std::abs(b.x - a.x);
    const int dy = -std::abs(b.y - a.y);
    const int sx = a.x < b.x ? 1 : -1;
    const int sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    Point p = a;
    while (true) {
        out.push_back(p);
        if (p == b) break;
        const int e2 = 2 * err;
        if (e2 >= dy) { err += dy; p.x += sx; }
        if (e2 <= dx) { err += dx; p.y += sy; }
    }
    return out;
}

PixelGrid connect_gaps(const PixelGrid& skel, const GapRepairConfig& cfg) {
    if (cfg.gap_threshold < 0) throw DomainError("gap_threshold must be >= 0");
    PixelGrid out = skel;
    const auto endpoints = detect_endpoints(skel);
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        for (std::size_t j = i + 1; j < endpoints.size(); ++j) {
            const Point p1 = endpoints[i];
            const Point p2 = endpoints[j];
            if (std::hypot(p1.x - p2.x, p1.y - p2.y) < cfg.gap_threshold) {
                for (const Point& p : bresenham_line(p1, p2)) out.set(p);
            }
        }
    }
    return out;
}

}  // namespace robopose
