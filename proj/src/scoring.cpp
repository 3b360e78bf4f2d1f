#include "tda/scoring.hpp"

#include <algorithm>
#include <stdexcept>

#include "tda/errors.hpp"

namespace tda {

RecencyMode recency_mode_from_string(const std::string& name) {
    if (name == "literal") return RecencyMode::literal;
    if (name == "inverted") return RecencyMode::inverted;
    throw ConfigError("unknown recency mode '" + name + "' (expected literal or inverted)");
}

FrequencyVariant frequency_variant_from_string(const std::string& name) {
    if (name == "count") return FrequencyVariant::count;
    if (name == "magnitude") return FrequencyVariant::magnitude;
    throw ConfigError("unknown frequency variant '" + name + "' (expected count or magnitude)");
}

AllocationMode allocation_mode_from_string(const std::string& name) {
    if (name == "paper_literal") return AllocationMode::paper_literal;
    if (name == "normalized") return AllocationMode::normalized;
    throw ConfigError("unknown allocation mode '" + name +
                      "' (expected paper_literal or normalized)");
}

std::string to_string(RecencyMode m) {
    return m == RecencyMode::literal ? "literal" : "inverted";
}
std::string to_string(FrequencyVariant v) {
    return v == FrequencyVariant::count ? "count" : "magnitude";
}
std::string to_string(AllocationMode m) {
    return m == AllocationMode::paper_literal ? "paper_literal" : "normalized";
}

std::optional<RfmFeatures> rfm_features(const DiffSeries& diffs, Date as_of, int lookback,
                                        FrequencyVariant variant) {
    if (lookback < 1) throw ParameterError("rfm lookback must be >= 1");
    const auto& obs = diffs.observations;
    if (obs.empty() || obs.front().date > as_of) return std::nullopt;

    const Date window_start = as_of - (lookback - 1);
    double frequency = 0.0;
    double monetary = 0.0;
    int in_window = 0;
    std::optional<Date> last_positive;
    for (const auto& o : obs) {
        if (o.date > as_of) break;
        if (o.value > 0.0) last_positive = o.date;
        if (o.date >= window_start) {
            ++in_window;
            monetary += o.value;
            if (variant == FrequencyVariant::count) {
                if (o.value > 0.0) frequency += 1.0;
            } else {
                if (o.value >= 0.0) frequency += o.value;
            }
        }
    }
    // Full lookback coverage required; partial histories are not zero-filled.
    if (in_window < lookback) return std::nullopt;

    RfmFeatures f;
    f.symbol = diffs.symbol;
    f.as_of = as_of;
    f.recency = last_positive ? static_cast<double>(as_of - *last_positive)
                              : static_cast<double>(lookback + 1);
    f.frequency = frequency;
    f.monetary = monetary;
    return f;
}

std::vector<double> normalize_minmax(const std::vector<double>& values) {
    if (values.empty()) throw ParameterError("normalize_minmax needs at least one value");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    std::vector<double> out(values.size(), 0.0);
    if (*lo == *hi) return out;
    const double range = *hi - *lo;
    for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
    return out;
}

std::vector<ScoredSymbol> composite_score(const FeatureMatrix& matrix, RecencyMode mode) {
    if (matrix.rows.empty()) throw ParameterError("composite_score needs a nonempty matrix");
    std::vector<double> r, f, m;
    r.reserve(matrix.rows.size());
    f.reserve(matrix.rows.size());
    m.reserve(matrix.rows.size());
    for (const auto& row : matrix.rows) {
        r.push_back(row.recency);
        f.push_back(row.frequency);
        m.push_back(row.monetary);
    }
    const auto rz = normalize_minmax(r);
    const auto fz = normalize_minmax(f);
    const auto mz = normalize_minmax(m);
    std::vector<ScoredSymbol> out;
    out.reserve(matrix.rows.size());
    for (size_t i = 0; i < matrix.rows.size(); ++i) {
        ScoredSymbol s;
        s.symbol = matrix.rows[i].symbol;
        s.r_z = mode == RecencyMode::inverted ? 1.0 - rz[i] : rz[i];
        s.f_z = fz[i];
        s.m_z = mz[i];
        s.score = s.r_z + s.f_z + s.m_z;
        out.push_back(std::move(s));
    }
    return out;
}

AllocationVector allocate(const std::vector<ScoredSymbol>& scores, AllocationMode mode,
                          Date as_of) {
    if (scores.empty()) throw ParameterError("allocate needs at least one score");
    AllocationVector out;
    out.as_of = as_of;
    out.mode = mode;
    out.weights.reserve(scores.size());
    if (mode == AllocationMode::paper_literal) {
        double count = 0.0;
        for (const auto& s : scores)
            if (s.score >= 0.0) count += 1.0;
        for (const auto& s : scores)
            out.weights.push_back({s.symbol, count > 0.0 ? s.score / count : 0.0});
    } else {
        double total = 0.0;
        for (const auto& s : scores)
            if (s.score >= 0.0) total += s.score;
        for (const auto& s : scores)
            out.weights.push_back(
                {s.symbol, total > 0.0 && s.score >= 0.0 ? s.score / total : 0.0});
    }
    return out;
}

}  // namespace tda
