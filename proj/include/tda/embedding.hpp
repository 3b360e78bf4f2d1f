#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tda/dates.hpp"
#include "tda/market_data.hpp"

namespace tda {

enum class Transform { log_price, raw_price, log_return };

Transform transform_from_string(const std::string& name);
std::string to_string(Transform t);

struct EmbeddingParams {
    int d = 4;
    int w = 30;
    Transform transform = Transform::log_price;

    // Enforces d >= 2, w >= d + 1 and d <= w/2.
    void validate() const;
};

// w points in R^d, stored row-major. Dated by the most recent price sample
// that contributes to it, so features at that date use no later data.
struct PointCloud {
    std::vector<double> coords;  // size w * d
    int w = 0;
    int d = 0;
    Date window_end_date;

    const double* point(int i) const { return coords.data() + static_cast<size_t>(i) * d; }
    int size() const { return w; }
};

// Overlapping d-dimensional slices: vector i = (x_i, ..., x_{i+d-1}),
// giving N - d + 1 vectors. Throws InsufficientDataError when N < d.
std::vector<std::vector<double>> delay_vectors(const std::vector<double>& values, int d);

struct TransformedSeries {
    std::vector<double> values;
    std::vector<Date> dates;  // same length; dates[i] is the day values[i] describes
};

// log_price/raw_price keep the series dates; log_return drops the first day.
TransformedSeries apply_transform(const PriceSeries& series, Transform t);

// One cloud per window position j in 1..N-d-w+2, each holding delay vectors
// z_j..z_{j+w-1}. Throws InsufficientDataError naming the required minimum.
std::vector<PointCloud> window_clouds(const PriceSeries& series, const EmbeddingParams& params);

}  // namespace tda
