#include "tda/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "tda/errors.hpp"

namespace tda {

Transform transform_from_string(const std::string& name) {
    if (name == "log_price") return Transform::log_price;
    if (name == "raw_price") return Transform::raw_price;
    if (name == "log_return") return Transform::log_return;
    throw ConfigError("unknown transform '" + name +
                      "' (expected log_price, raw_price or log_return)");
}

std::string to_string(Transform t) {
    switch (t) {
        case Transform::log_price: return "log_price";
        case Transform::raw_price: return "raw_price";
        case Transform::log_return: return "log_return";
    }
    throw std::logic_error("unreachable");
}

void EmbeddingParams::validate() const {
    if (d < 2) throw ParameterError("embedding.d must be >= 2, got " + std::to_string(d));
    if (w < d + 1)
        throw ParameterError("embedding.w must be >= d + 1, got w=" + std::to_string(w) +
                             " with d=" + std::to_string(d));
    if (2 * d > w)
        throw ParameterError("embedding.d must satisfy d <= w/2, got d=" + std::to_string(d) +
                             " with w=" + std::to_string(w));
}

std::vector<std::vector<double>> delay_vectors(const std::vector<double>& values, int d) {
    if (d < 1) throw ParameterError("delay dimension must be >= 1, got " + std::to_string(d));
    const auto n = static_cast<int>(values.size());
    if (n < d)
        throw InsufficientDataError("need at least " + std::to_string(d) + " values, got " +
                                    std::to_string(n));
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<size_t>(n - d + 1));
    for (int i = 0; i + d <= n; ++i)
        out.emplace_back(values.begin() + i, values.begin() + i + d);
    return out;
}

TransformedSeries apply_transform(const PriceSeries& series, Transform t) {
    const auto& obs = series.observations();
    TransformedSeries out;
    switch (t) {
        case Transform::raw_price:
            for (const auto& p : obs) {
                out.values.push_back(p.close);
                out.dates.push_back(p.date);
            }
            break;
        case Transform::log_price:
            for (const auto& p : obs) {
                out.values.push_back(std::log(p.close));
                out.dates.push_back(p.date);
            }
            break;
        case Transform::log_return:
            if (obs.size() < 2)
                throw InsufficientDataError("log_return needs at least 2 observations, got " +
                                            std::to_string(obs.size()));
            for (size_t i = 1; i < obs.size(); ++i) {
                out.values.push_back(std::log(obs[i].close / obs[i - 1].close));
                out.dates.push_back(obs[i].date);
            }
            break;
    }
    return out;
}

std::vector<PointCloud> window_clouds(const PriceSeries& series, const EmbeddingParams& params) {
    params.validate();
    const auto ts = apply_transform(series, params.transform);
    const auto n = static_cast<int>(ts.values.size());
    const int d = params.d;
    const int w = params.w;
    const int min_n = d + w - 1;
    if (n < min_n)
        throw InsufficientDataError(series.symbol() + ": need at least " + std::to_string(min_n) +
                                    " transformed values for d=" + std::to_string(d) +
                                    ", w=" + std::to_string(w) + ", got " + std::to_string(n));

    // Cloud j (0-based) holds delay vectors starting at j..j+w-1; its last
    // vector ends at sample j+w-1+d-1, which dates the cloud.
    const int cloud_count = n - d - w + 2;
    std::vector<PointCloud> clouds;
    clouds.reserve(static_cast<size_t>(cloud_count));
    for (int j = 0; j < cloud_count; ++j) {
        PointCloud pc;
        pc.w = w;
        pc.d = d;
        pc.window_end_date = ts.dates[static_cast<size_t>(j + w + d - 2)];
        pc.coords.reserve(static_cast<size_t>(w) * d);
        for (int i = j; i < j + w; ++i)
            pc.coords.insert(pc.coords.end(), ts.values.begin() + i, ts.values.begin() + i + d);
        clouds.push_back(std::move(pc));
    }
    return clouds;
}

}  // namespace tda
