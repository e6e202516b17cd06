#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "specrank/errors.hpp"

namespace specrank {

// One multiway comparison: a choice set of >= 2 distinct items and the item
// selected from it.
struct Comparison {
    std::vector<std::uint32_t> choice_set;
    std::uint32_t winner = 0;

    bool contains(std::uint32_t item) const {
        return std::find(choice_set.begin(), choice_set.end(), item) != choice_set.end();
    }
};

// A full ranking of >= 2 distinct items, best first.
struct FullRanking {
    std::vector<std::uint32_t> ranked_items;
};

// An immutable-by-convention collection of comparisons over items [0, n_items).
// `labels` (empty or length n_items) preserves the source naming when data was
// ingested from labeled text. `groups` (empty, or one id per comparison) marks
// comparisons that came from the same source event (e.g. the multi-level
// breaking of one full ranking); the grouped bootstrap shares one multiplier
// per group. Empty groups means every comparison is its own group.
struct ComparisonDataset {
    std::uint32_t n_items = 0;
    std::vector<Comparison> comparisons;
    std::vector<std::string> labels;
    std::vector<std::uint32_t> groups;

    std::size_t size() const { return comparisons.size(); }

    std::uint32_t group_of(std::size_t l) const {
        return groups.empty() ? std::uint32_t(l) : groups[l];
    }

    std::uint32_t group_count() const {
        if (groups.empty()) return std::uint32_t(comparisons.size());
        std::uint32_t g = 0;
        for (std::uint32_t id : groups) g = std::max(g, id + 1);
        return g;
    }

    // True when some group spans more than one comparison.
    bool has_nontrivial_groups() const {
        return !groups.empty() && group_count() < comparisons.size();
    }

    std::string label_of(std::uint32_t item) const {
        if (item < labels.size()) return labels[item];
        return std::to_string(item);
    }
};

inline void validate_comparison(const Comparison& c, std::uint32_t n_items) {
    if (c.choice_set.size() < 2)
        throw ValidationError("choice set must contain at least 2 items");
    std::unordered_set<std::uint32_t> seen;
    for (std::uint32_t item : c.choice_set) {
        if (item >= n_items)
            throw ValidationError("item index " + std::to_string(item) +
                                  " out of range [0, " + std::to_string(n_items) + ")");
        if (!seen.insert(item).second)
            throw ValidationError("duplicate item " + std::to_string(item) + " in choice set");
    }
    if (!seen.count(c.winner))
        throw ValidationError("winner " + std::to_string(c.winner) + " not in choice set");
}

inline void validate_dataset(const ComparisonDataset& ds) {
    if (ds.n_items == 0) throw ValidationError("dataset has no items");
    if (ds.comparisons.empty()) throw ValidationError("dataset has no comparisons");
    if (!ds.labels.empty() && ds.labels.size() != ds.n_items)
        throw ValidationError("labels table size does not match n_items");
    if (!ds.groups.empty() && ds.groups.size() != ds.comparisons.size())
        throw ValidationError("groups size does not match comparison count");
    for (const Comparison& c : ds.comparisons) validate_comparison(c, ds.n_items);
}

// Multi-level breaking: a ranking i1 > i2 > ... > iB becomes the B-1 nested
// selection events (i1, {i1..iB}), (i2, {i2..iB}), ..., (i_{B-1}, {i_{B-1}, iB}).
inline std::vector<Comparison> break_full_ranking(const FullRanking& r) {
    const auto& items = r.ranked_items;
    if (items.size() < 2) throw ValidationError("ranking must list at least 2 items");
    {
        std::unordered_set<std::uint32_t> seen;
        for (std::uint32_t item : items)
            if (!seen.insert(item).second)
                throw ValidationError("duplicate item " + std::to_string(item) + " in ranking");
    }
    std::vector<Comparison> out;
    out.reserve(items.size() - 1);
    for (std::size_t level = 0; level + 1 < items.size(); ++level) {
        Comparison c;
        c.choice_set.assign(items.begin() + std::ptrdiff_t(level), items.end());
        c.winner = items[level];
        out.push_back(std::move(c));
    }
    return out;
}

// Builds a dataset from full rankings via multi-level breaking; all breakings
// of ranking q share group id q.
inline ComparisonDataset dataset_from_rankings(const std::vector<FullRanking>& rankings,
                                               std::uint32_t n_items) {
    ComparisonDataset ds;
    ds.n_items = n_items;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        for (Comparison& c : break_full_ranking(rankings[q])) {
            ds.comparisons.push_back(std::move(c));
            ds.groups.push_back(std::uint32_t(q));
        }
    }
    validate_dataset(ds);
    return ds;
}

} // namespace specrank
