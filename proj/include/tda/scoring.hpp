#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tda/dates.hpp"
#include "tda/landscape.hpp"

namespace tda {

enum class RecencyMode { literal, inverted };
enum class FrequencyVariant { count, magnitude };
enum class AllocationMode { paper_literal, normalized };

RecencyMode recency_mode_from_string(const std::string& name);
FrequencyVariant frequency_variant_from_string(const std::string& name);
AllocationMode allocation_mode_from_string(const std::string& name);
std::string to_string(RecencyMode m);
std::string to_string(FrequencyVariant v);
std::string to_string(AllocationMode m);

struct RfmFeatures {
    std::string symbol;
    Date as_of;
    double recency = 0.0;    // days since the last positive diff; lookback+1 if none
    double frequency = 0.0;  // positive diffs in the lookback window (or their sum)
    double monetary = 0.0;   // sum of diffs in the lookback window
};

struct FeatureMatrix {
    Date as_of;
    std::vector<RfmFeatures> rows;
};

// Features for one currency, or nothing when the currency is ineligible:
// no diffs at or before as_of, or the lookback window is not fully covered.
std::optional<RfmFeatures> rfm_features(const DiffSeries& diffs, Date as_of, int lookback,
                                        FrequencyVariant variant = FrequencyVariant::count);

// (x - min) / (max - min); a constant column maps to all zeros.
std::vector<double> normalize_minmax(const std::vector<double>& values);

struct ScoredSymbol {
    std::string symbol;
    double r_z = 0.0;
    double f_z = 0.0;
    double m_z = 0.0;
    double score = 0.0;  // in [0, 3]
};

// Min-max normalizes each feature column across the matrix, then sums.
// inverted mode replaces the recency column by 1 - r_z first.
std::vector<ScoredSymbol> composite_score(const FeatureMatrix& matrix, RecencyMode mode);

struct WeightEntry {
    std::string symbol;
    double weight = 0.0;
};

struct AllocationVector {
    Date as_of;
    std::vector<WeightEntry> weights;
    AllocationMode mode = AllocationMode::paper_literal;
};

// paper_literal: score / count of nonnegative scores (sum may be below 1;
// the backtest holds the rest in cash). normalized: score / sum of scores,
// all zero when every score is 0.
AllocationVector allocate(const std::vector<ScoredSymbol>& scores, AllocationMode mode,
                          Date as_of);

}  // namespace tda
