#include "tda/landscape.hpp"

#include <algorithm>
#include <cmath>

#include "tda/errors.hpp"

namespace tda {

namespace {

// Drops points collinear with their neighbours (exact slope repeats only;
// keeping a redundant point never changes the function).
std::vector<PersistenceLandscape::Point> compress(
    const std::vector<PersistenceLandscape::Point>& pts) {
    std::vector<PersistenceLandscape::Point> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        while (out.size() >= 2) {
            const auto& a = out[out.size() - 2];
            const auto& b = out.back();
            const double lhs = (b.first - a.first) * (p.second - a.second);
            const double rhs = (p.first - a.first) * (b.second - a.second);
            if (lhs == rhs)
                out.pop_back();
            else
                break;
        }
        out.push_back(p);
    }
    // Trim zero tails down to a single bounding zero on each side.
    size_t lo = 0;
    while (lo + 1 < out.size() && out[lo].second == 0.0 && out[lo + 1].second == 0.0) ++lo;
    size_t hi = out.size();
    while (hi >= 2 && out[hi - 1].second == 0.0 && out[hi - 2].second == 0.0) --hi;
    return {out.begin() + static_cast<ptrdiff_t>(lo), out.begin() + static_cast<ptrdiff_t>(hi)};
}

}  // namespace

PersistenceLandscape::PersistenceLandscape(std::vector<std::vector<Point>> levels)
    : levels_(std::move(levels)) {}

double PersistenceLandscape::value(size_t k, double x) const {
    if (k >= levels_.size()) return 0.0;
    const auto& pts = levels_[k];
    if (pts.empty() || x <= pts.front().first || x >= pts.back().first) {
        // On-boundary values equal the stored endpoint values, which are 0
        // by construction except for exact boundary hits.
        if (!pts.empty() && x == pts.front().first) return pts.front().second;
        if (!pts.empty() && x == pts.back().first) return pts.back().second;
        return 0.0;
    }
    auto it = std::upper_bound(pts.begin(), pts.end(), x,
                               [](double v, const Point& p) { return v < p.first; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double t = (x - a.first) / (b.first - a.first);
    return a.second + t * (b.second - a.second);
}

PersistenceLandscape landscape_from_diagram(const PersistenceDiagram& diagram, int dim) {
    std::vector<std::pair<double, double>> tents;
    for (const auto& p : diagram.pairs)
        if (p.dim == dim && !p.essential() && p.birth < p.death)
            tents.emplace_back(p.birth, p.death);
    if (tents.empty()) return PersistenceLandscape{};

    // Every kink or crossing of a k-th-largest-of-tents function lies at a
    // birth, a death, or a midpoint (b_i + d_j)/2; between consecutive
    // candidates each level follows a single tent, so sampling candidates
    // reproduces the function exactly.
    std::vector<double> xs;
    xs.reserve(tents.size() * (tents.size() + 2));
    for (const auto& [b, d] : tents) {
        xs.push_back(b);
        xs.push_back(d);
    }
    for (const auto& [bi, di] : tents)
        for (const auto& [bj, dj] : tents) xs.push_back((bi + dj) / 2.0);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<std::vector<PersistenceLandscape::Point>> levels;
    std::vector<double> vals;
    for (const double x : xs) {
        vals.clear();
        for (const auto& [b, d] : tents) {
            const double v = std::min(x - b, d - x);
            if (v > 0.0) vals.push_back(v);
        }
        std::sort(vals.begin(), vals.end(), std::greater<>());
        if (vals.size() > levels.size()) levels.resize(vals.size());
        for (size_t k = 0; k < levels.size(); ++k)
            levels[k].emplace_back(x, k < vals.size() ? vals[k] : 0.0);
    }
    // Early levels start collecting points only once their first positive
    // value appears; pad the front with zeros at the skipped candidates.
    for (auto& lvl : levels) {
        const size_t missing = xs.size() - lvl.size();
        if (missing > 0) {
            std::vector<PersistenceLandscape::Point> padded;
            padded.reserve(xs.size());
            for (size_t i = 0; i < missing; ++i) padded.emplace_back(xs[i], 0.0);
            padded.insert(padded.end(), lvl.begin(), lvl.end());
            lvl = std::move(padded);
        }
        lvl = compress(lvl);
    }
    return PersistenceLandscape{std::move(levels)};
}

namespace {

double segment_integral(double x0, double y0, double x1, double y1, double p) {
    const double dx = x1 - x0;
    if (dx <= 0.0) return 0.0;
    if (p == 1.0) return dx * (y0 + y1) / 2.0;
    if (p == 2.0) return dx * (y0 * y0 + y0 * y1 + y1 * y1) / 3.0;
    if (y0 == y1) return dx * std::pow(y0, p);
    return dx * (std::pow(y1, p + 1.0) - std::pow(y0, p + 1.0)) / ((p + 1.0) * (y1 - y0));
}

}  // namespace

double lp_norm(const PersistenceLandscape& landscape, double p) {
    if (!(p >= 1.0)) throw ParameterError("lp_norm requires p >= 1");
    double total = 0.0;
    for (size_t k = 0; k < landscape.level_count(); ++k) {
        const auto& pts = landscape.level(k);
        for (size_t i = 1; i < pts.size(); ++i)
            total += segment_integral(pts[i - 1].first, pts[i - 1].second, pts[i].first,
                                      pts[i].second, p);
    }
    return std::pow(total, 1.0 / p);
}

double norm_from_diagram(const PersistenceDiagram& diagram, const NormOptions& options) {
    if (!(options.p >= 1.0)) throw ParameterError("norm exponent must be >= 1");
    const auto l1 = landscape_from_diagram(diagram, 1);
    if (!options.include_h0) return lp_norm(l1, options.p);
    const auto l0 = landscape_from_diagram(diagram, 0);
    const double powsum = std::pow(lp_norm(l1, options.p), options.p) +
                          std::pow(lp_norm(l0, options.p), options.p);
    return std::pow(powsum, 1.0 / options.p);
}

NormSeries norm_series(const PriceSeries& series, const EmbeddingParams& params,
                       const NormOptions& options) {
    if (!(options.p >= 1.0)) throw ParameterError("norm exponent must be >= 1");
    NormSeries out;
    out.symbol = series.symbol();
    const auto clouds = window_clouds(series, params);
    out.observations.reserve(clouds.size());
    for (const auto& cloud : clouds) {
        const auto dm = distance_matrix(cloud);
        const double threshold =
            std::isnan(options.threshold) ? enclosing_threshold(dm) : options.threshold;
        const auto diagram = compute_persistence(build_rips(dm, 2, threshold));
        out.observations.push_back({cloud.window_end_date, norm_from_diagram(diagram, options)});
    }
    return out;
}

DiffSeries diff_series(const NormSeries& norms) {
    if (norms.observations.size() < 2)
        throw InsufficientDataError(norms.symbol + ": need at least 2 norm observations, got " +
                                    std::to_string(norms.observations.size()));
    DiffSeries out;
    out.symbol = norms.symbol;
    out.observations.reserve(norms.observations.size() - 1);
    for (size_t i = 1; i < norms.observations.size(); ++i)
        out.observations.push_back({norms.observations[i].date,
                                    norms.observations[i].value -
                                        norms.observations[i - 1].value});
    return out;
}

}  // namespace tda
