#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace oracle {

namespace fs = std::filesystem;

std::vector<int> flood_labels(const PixelGrid& g, int connectivity, int* count) {
    const int w = g.width(), h = g.height();
    std::vector<int> lab(static_cast<std::size_t>(w) * h, 0);
    int next = 0;
    std::function<void(int, int)> fill = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h || !g.at(x, y) || lab[y * w + x]) return;
        lab[y * w + x] = next;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (!dx && !dy) continue;
                if (connectivity == 4 && dx && dy) continue;
                fill(x + dx, y + dy);
            }
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (g.at(x, y) && !lab[y * w + x]) {
                ++next;
                fill(x, y);
            }
    if (count) *count = next;
    return lab;
}

int component_count(const PixelGrid& g, int connectivity) {
    int n = 0;
    flood_labels(g, connectivity, &n);
    return n;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == 0) != (b[i] == 0)) return false;
        if (!a[i]) continue;
        auto [it, fresh] = ab.emplace(a[i], b[i]);
        if (it->second != b[i]) return false;
        auto [jt, fresh2] = ba.emplace(b[i], a[i]);
        if (jt->second != a[i]) return false;
    }
    return true;
}

PixelGrid clean(const PixelGrid& g, std::size_t min_area, std::size_t max_hole_area) {
    const int w = g.width(), h = g.height();
    PixelGrid out = g;
    int n = 0;
    auto lab = flood_labels(g, 8, &n);
    std::vector<std::size_t> area(n + 1, 0);
    for (int v : lab) area[v]++;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (lab[y * w + x] && area[lab[y * w + x]] < min_area) out.set(x, y, false);

    PixelGrid bg(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) bg.set(x, y, !out.at(x, y));
    auto hl = flood_labels(bg, 4, &n);
    std::vector<std::size_t> harea(n + 1, 0);
    std::vector<bool> border(n + 1, false);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int l = hl[y * w + x];
            harea[l]++;
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1) border[l] = true;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int l = hl[y * w + x];
            if (l && !border[l] && harea[l] <= max_hole_area) out.set(x, y, true);
        }
    return out;
}

std::vector<Point> endpoints(const PixelGrid& g) {
    std::vector<Point> out;
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) {
            if (!g.at(x, y)) continue;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if ((dx || dy) && g.get(x + dx, y + dy)) ++n;
            if (n == 1) out.push_back({x, y});
        }
    return out;
}

PixelGrid zhang_suen(const PixelGrid& g) {
    PixelGrid img = g;
    // P2..P9 clockwise from north.
    const int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    const int dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            std::vector<Point> del;
            for (int y = 0; y < img.height(); ++y)
                for (int x = 0; x < img.width(); ++x) {
                    if (!img.at(x, y)) continue;
                    int p[8];
                    for (int k = 0; k < 8; ++k) p[k] = img.get(x + dx[k], y + dy[k]);
                    const int b = std::accumulate(p, p + 8, 0);
                    int a = 0;
                    for (int k = 0; k < 8; ++k) a += !p[k] && p[(k + 1) % 8];
                    if (b < 2 || b > 6 || a != 1) continue;
                    const bool c1 = pass == 0 ? !(p[0] && p[2] && p[4]) : !(p[0] && p[2] && p[6]);
                    const bool c2 = pass == 0 ? !(p[2] && p[4] && p[6]) : !(p[0] && p[4] && p[6]);
                    if (c1 && c2) del.push_back({x, y});
                }
            for (const auto& q : del) img.set(q, false);
            changed |= !del.empty();
        }
    }
    return img;
}

bool has_full_block(const PixelGrid& g) {
    for (int y = 0; y + 1 < g.height(); ++y)
        for (int x = 0; x + 1 < g.width(); ++x)
            if (g.at(x, y) + g.at(x + 1, y) + g.at(x, y + 1) + g.at(x + 1, y + 1) == 4) return true;
    return false;
}

PixelGrid random_blobs(int w, int h, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    PixelGrid g(w, h);
    const int shapes = 1 + static_cast<int>(U(rng) * 4);
    for (int s = 0; s < shapes; ++s) {
        const double cx = U(rng) * w, cy = U(rng) * h;
        if (U(rng) < 0.5) {
            const double r = 2.0 + U(rng) * 9.0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) g.set(x, y);
        } else {
            const double ex = U(rng) * w, ey = U(rng) * h, r = 1.0 + U(rng) * 3.5;
            const double vx = ex - cx, vy = ey - cy, L2 = std::max(vx * vx + vy * vy, 1e-9);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double t = std::clamp(((x - cx) * vx + (y - cy) * vy) / L2, 0.0, 1.0);
                    const double px = cx + t * vx - x, py = cy + t * vy - y;
                    if (px * px + py * py <= r * r) g.set(x, y);
                }
        }
    }
    return g;
}

std::size_t longest_simple_path(const PixelGrid& g, Point start) {
    std::vector<char> seen(static_cast<std::size_t>(g.width()) * g.height(), 0);
    std::function<std::size_t(Point)> dfs = [&](Point p) -> std::size_t {
        seen[g.index(p.x, p.y)] = 1;
        std::size_t best = 0;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const Point q{p.x + dx, p.y + dy};
                if ((dx || dy) && g.get(q.x, q.y) && !seen[g.index(q.x, q.y)]) best = std::max(best, dfs(q));
            }
        seen[g.index(p.x, p.y)] = 0;
        return best + 1;
    };
    return dfs(start);
}

double smoothness(const std::vector<Point>& p) {
    if (p.size() < 3) return 1.0;
    double sum = 0;
    for (std::size_t i = 0; i + 2 < p.size(); ++i) {
        const double ax = p[i + 1].x - p[i].x, ay = p[i + 1].y - p[i].y;
        const double bx = p[i + 2].x - p[i + 1].x, by = p[i + 2].y - p[i + 1].y;
        sum += std::abs((ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by)));
    }
    return sum / static_cast<double>(p.size() - 2);
}

double consistency(const std::vector<Point>& p) {
    const double mx = p.back().x - p.front().x, my = p.back().y - p.front().y;
    if (p.size() < 2 || (mx == 0 && my == 0)) return 0.0;
    double sum = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double vx = p[i + 1].x - p[i].x, vy = p[i + 1].y - p[i].y;
        sum += std::abs((vx * mx + vy * my) / (std::hypot(vx, vy) * std::hypot(mx, my)));
    }
    return sum / static_cast<double>(p.size() - 1);
}

Moments abs_error_moments(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> e;
    for (std::size_t i = 0; i < x.size(); ++i) e.push_back(std::abs(x[i] - y[i]));
    const double n = static_cast<double>(e.size());
    double mean = 0;
    for (double v : e) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : e) ss += (v - mean) * (v - mean);
    std::sort(e.begin(), e.end());
    const std::size_t m = e.size() / 2;
    const double median = e.size() % 2 ? e[m] : 0.5 * (e[m - 1] + e[m]);
    return {mean, std::sqrt(ss / (n - 1)), median};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double u : v) {
            less += u < v[i];
            equal += u == v[i];
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const bool ties = std::set<double>(x.begin(), x.end()).size() != x.size() ||
                      std::set<double>(y.begin(), y.end()).size() != y.size();
    if (ties) return pearson(rx, ry);
    const double n = static_cast<double>(x.size());
    double d2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

Loa bland_altman(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mean = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mean += x[i] - y[i];
    mean /= n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
    const double s = std::sqrt(ss / (n - 1));
    return {mean, s, mean + 1.96 * s, mean - 1.96 * s};
}

ClassOracle classification(const std::vector<std::vector<long>>& cm) {
    const std::size_t k = cm.size();
    ClassOracle o{};
    double total = 0, diag = 0;
    std::vector<double> row(k, 0), col(k, 0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            total += cm[i][j];
            row[i] += cm[i][j];
            col[j] += cm[i][j];
            if (i == j) diag += cm[i][j];
        }
    o.accuracy = diag / total;
    double pe = 0;
    for (std::size_t i = 0; i < k; ++i) pe += row[i] * col[i] / (total * total);
    o.kappa = (o.accuracy - pe) / (1 - pe);
    o.macro_p = o.macro_r = o.macro_f1 = o.weighted_p = o.weighted_r = o.weighted_f1 = o.fm = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double tp = cm[i][i];
        const double p = col[i] > 0 ? tp / col[i] : 0.0;
        const double r = row[i] > 0 ? tp / row[i] : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        o.precision.push_back(p);
        o.recall.push_back(r);
        o.f1.push_back(f);
        o.macro_p += p / k;
        o.macro_r += r / k;
        o.macro_f1 += f / k;
        o.weighted_p += p * row[i] / total;
        o.weighted_r += r * row[i] / total;
        o.weighted_f1 += f * row[i] / total;
        o.fm += std::sqrt(p * r) / k;
    }
    return o;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).generic_string(), read_file(e.path()));
    std::sort(out.begin(), out.end());
    return out;
}

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("robopose_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace oracle
