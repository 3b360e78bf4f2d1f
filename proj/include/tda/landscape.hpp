#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tda/dates.hpp"
#include "tda/embedding.hpp"
#include "tda/market_data.hpp"
#include "tda/persistence.hpp"

namespace tda {

// Exact piecewise-linear landscape: level k holds the critical points of
// the k-th largest tent function f_(b,d)(x) = max(0, min(x-b, d-x)). Values
// are 0 outside each level's stored range. No grid sampling anywhere.
class PersistenceLandscape {
  public:
    using Point = std::pair<double, double>;  // (x, value)

    PersistenceLandscape() = default;
    explicit PersistenceLandscape(std::vector<std::vector<Point>> levels);

    size_t level_count() const { return levels_.size(); }
    const std::vector<Point>& level(size_t k) const { return levels_[k]; }

    // lambda_k(x); k is 0-based, anything past the last level is 0.
    double value(size_t k, double x) const;

  private:
    std::vector<std::vector<Point>> levels_;
};

// Builds the landscape from the diagram's finite pairs of one homology
// dimension. Essential pairs are excluded. Empty selection -> no levels.
PersistenceLandscape landscape_from_diagram(const PersistenceDiagram& diagram, int dim);

// (sum_k integral |lambda_k|^p)^(1/p) with closed-form segment integrals.
// Throws ParameterError for p < 1.
double lp_norm(const PersistenceLandscape& landscape, double p = 2.0);

struct NormSeries {
    std::string symbol;
    std::vector<DatedValue> observations;
};

struct DiffSeries {
    std::string symbol;
    std::vector<DatedValue> observations;
};

struct NormOptions {
    double p = 2.0;
    // Also fold finite H0 pairs into the norm (off: H1 only).
    bool include_h0 = false;
    // Rips threshold; NaN means each cloud's own enclosing value.
    double threshold = std::numeric_limits<double>::quiet_NaN();
};

// The norm the pipeline attaches to one diagram: H1 landscape by default,
// with finite H0 pairs folded in as a second summand when requested.
double norm_from_diagram(const PersistenceDiagram& diagram, const NormOptions& options);

// Per window cloud: distances -> Rips -> persistence -> landscape norm,
// dated by the cloud's window_end_date.
NormSeries norm_series(const PriceSeries& series, const EmbeddingParams& params,
                       const NormOptions& options = {});

// First differences of consecutive norm observations, dated by the later day.
DiffSeries diff_series(const NormSeries& norms);

}  // namespace tda
