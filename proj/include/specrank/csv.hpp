#pragma once

#include <cctype>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "specrank/data.hpp"
#include "specrank/errors.hpp"

namespace specrank {

enum class BreakMode { none, multilevel };

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::optional<std::uint64_t> parse_uint(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    for (char ch : s) {
        if (ch < '0' || ch > '9') return std::nullopt;
        v = v * 10 + std::uint64_t(ch - '0');
        if (v > 0xffffffffULL) return std::nullopt;
    }
    return v;
}

} // namespace detail

// Parses comparison data.
//
// Row formats (comma-separated; '#' lines and blank lines are skipped, an
// optional leading header row "winner,set" is ignored):
//   winner,item,item,...      one selection event; repeated items in the set
//                             are deduplicated; the winner must be in the set
//   rank:i1>i2>...>iB         a full ranking, best first; requires
//                             BreakMode::multilevel and expands to B-1
//                             comparisons sharing one group id
//   n=<count>                 optional first directive: items are literal
//                             0-based indices in [0, count)
//
// Without an n= directive every token is a label; labels map to internal ids
// by first appearance and the mapping is kept in the dataset's labels table.
inline ComparisonDataset parse_choice_csv(std::istream& in, BreakMode break_mode = BreakMode::none) {
    ComparisonDataset ds;
    std::unordered_map<std::string, std::uint32_t> label_ids;
    bool indexed_mode = false;
    std::uint32_t n_directive = 0;
    bool saw_data = false;
    bool saw_header_check = false;
    std::uint32_t next_group = 0;
    std::size_t line_no = 0;

    auto resolve = [&](const std::string& raw, std::size_t line) -> std::uint32_t {
        const std::string tok = detail::trim(raw);
        if (tok.empty()) throw ParseError(line, "empty item token");
        if (indexed_mode) {
            auto v = detail::parse_uint(tok);
            if (!v) throw ParseError(line, "non-integer token '" + tok + "'");
            if (*v >= n_directive)
                throw ValidationError("line " + std::to_string(line) + ": item index " + tok +
                                      " outside declared universe [0, " +
                                      std::to_string(n_directive) + ")");
            return std::uint32_t(*v);
        }
        auto it = label_ids.find(tok);
        if (it != label_ids.end()) return it->second;
        const auto id = std::uint32_t(ds.labels.size());
        label_ids.emplace(tok, id);
        ds.labels.push_back(tok);
        return id;
    };

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;

        if (!saw_header_check) {
            saw_header_check = true;
            std::string squashed;
            for (char ch : s)
                if (!std::isspace(static_cast<unsigned char>(ch))) squashed.push_back(ch);
            if (squashed == "winner,set") continue;
        }

        if (s.rfind("n=", 0) == 0) {
            if (saw_data) throw ParseError(line_no, "n= directive must precede data rows");
            auto v = detail::parse_uint(detail::trim(s.substr(2)));
            if (!v || *v == 0) throw ParseError(line_no, "bad n= directive");
            indexed_mode = true;
            n_directive = std::uint32_t(*v);
            continue;
        }

        saw_data = true;
        if (s.rfind("rank:", 0) == 0) {
            if (break_mode != BreakMode::multilevel)
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": rank rows require --break=multilevel");
            FullRanking r;
            for (const std::string& tok : detail::split(s.substr(5), '>'))
                r.ranked_items.push_back(resolve(tok, line_no));
            std::vector<Comparison> broken;
            try {
                broken = break_full_ranking(r);
            } catch (const ValidationError& e) {
                throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
            }
            for (Comparison& c : broken) {
                ds.comparisons.push_back(std::move(c));
                ds.groups.push_back(next_group);
            }
            ++next_group;
            continue;
        }

        const std::vector<std::string> tokens = detail::split(s, ',');
        if (tokens.size() < 3)
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": a comparison row needs a winner and a set of at least 2 items");
        Comparison c;
        c.winner = resolve(tokens[0], line_no);
        for (std::size_t t = 1; t < tokens.size(); ++t) {
            const std::uint32_t id = resolve(tokens[t], line_no);
            if (std::find(c.choice_set.begin(), c.choice_set.end(), id) == c.choice_set.end())
                c.choice_set.push_back(id);
        }
        if (c.choice_set.size() < 2)
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": choice set has fewer than 2 distinct items");
        if (!c.contains(c.winner))
            throw ValidationError("line " + std::to_string(line_no) + ": winner '" +
                                  detail::trim(tokens[0]) + "' not in the choice set");
        ds.comparisons.push_back(std::move(c));
        ds.groups.push_back(next_group);
        ++next_group;
    }

    ds.n_items = indexed_mode ? n_directive : std::uint32_t(ds.labels.size());
    if (ds.comparisons.empty()) throw ValidationError("no comparisons found in input");
    validate_dataset(ds);
    return ds;
}

inline ComparisonDataset parse_choice_csv(const std::string& text,
                                          BreakMode break_mode = BreakMode::none) {
    std::istringstream in(text);
    return parse_choice_csv(in, break_mode);
}

// Resolves a user-facing item name (label if the dataset has labels, else a
// 0-based index) to an internal id.
inline std::uint32_t resolve_item(const ComparisonDataset& ds, const std::string& name) {
    if (!ds.labels.empty()) {
        for (std::uint32_t i = 0; i < ds.labels.size(); ++i)
            if (ds.labels[i] == name) return i;
        throw ParameterError("unknown item label '" + name + "'");
    }
    auto v = detail::parse_uint(detail::trim(name));
    if (!v || *v >= ds.n_items)
        throw ParameterError("item index '" + name + "' outside [0, " +
                             std::to_string(ds.n_items) + ")");
    return std::uint32_t(*v);
}

} // namespace specrank
