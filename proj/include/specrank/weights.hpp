#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specrank/data.hpp"
#include "specrank/errors.hpp"

namespace specrank {

// The per-comparison weighting function f(A_l) > 0 used in the transition
// matrix: 1, |A_l|, or sum_{u in A_l} e^{theta_u}. Score-based weights with
// theta near the truth are the efficiency-optimal choice.
struct WeightScheme {
    enum class Kind { Constant, SetSize, Scores };

    Kind kind = Kind::SetSize;
    std::vector<double> theta;  // Scores only

    static WeightScheme constant() { return {Kind::Constant, {}}; }
    static WeightScheme set_size() { return {Kind::SetSize, {}}; }
    static WeightScheme scores(std::vector<double> t) {
        WeightScheme w{Kind::Scores, std::move(t)};
        for (double v : w.theta)
            if (!std::isfinite(v)) throw ParameterError("score weights require finite theta");
        return w;
    }

    std::string name() const {
        switch (kind) {
            case Kind::Constant: return "constant";
            case Kind::SetSize: return "set-size";
            case Kind::Scores: return "scores";
        }
        return "?";
    }

    double evaluate(std::span<const std::uint32_t> items) const {
        switch (kind) {
            case Kind::Constant: return 1.0;
            case Kind::SetSize: return double(items.size());
            case Kind::Scores: {
                double s = 0.0;
                for (std::uint32_t u : items) {
                    if (u >= theta.size())
                        throw ParameterError("score weights shorter than item universe");
                    s += std::exp(theta[u]);
                }
                return s;
            }
        }
        return 1.0;
    }
};

// f(A_l) for every comparison. Validates positivity and finiteness once so
// hot loops can divide freely.
inline std::vector<double> comparison_weights(const ComparisonDataset& ds,
                                              const WeightScheme& scheme) {
    if (scheme.kind == WeightScheme::Kind::Scores && scheme.theta.size() != ds.n_items)
        throw ParameterError("score weights must have length n_items");
    std::vector<double> w;
    w.reserve(ds.comparisons.size());
    for (const Comparison& c : ds.comparisons) {
        const double f = scheme.evaluate(c.choice_set);
        if (!(f > 0.0) || !std::isfinite(f))
            throw ParameterError("weighting function must be positive and finite");
        w.push_back(f);
    }
    return w;
}

} // namespace specrank
