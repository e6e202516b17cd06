#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "specrank/csv.hpp"
#include "specrank/data.hpp"
#include "specrank/errors.hpp"
#include "specrank/inference.hpp"
#include "specrank/spectral.hpp"

namespace specrank {

namespace detail {

// %.17g round-trips IEEE doubles exactly through text.
inline std::string full_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_fit_csv(std::ostream& out, const SpectralFit& f,
                          const ComparisonDataset& ds) {
    out << "scheme," << fit_scheme_name(f.selector) << "\n";
    out << "d," << detail::full_double(f.d) << "\n";
    out << "iterations," << f.iterations << "\n";
    out << "residual," << detail::full_double(f.residual) << "\n";
    out << "item,label,theta,pi\n";
    for (std::uint32_t i = 0; i < ds.n_items; ++i)
        out << i << "," << ds.label_of(i) << "," << detail::full_double(f.theta[i]) << ","
            << detail::full_double(f.pi_hat[i]) << "\n";
}

// Reads back what write_fit_csv produced (losslessly for theta/pi/d).
inline SpectralFit read_fit_csv(std::istream& in) {
    SpectralFit f;
    std::string line;
    std::size_t line_no = 0;
    bool in_rows = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        const std::vector<std::string> tok = detail::split(s, ',');
        if (!in_rows) {
            if (tok.size() == 2 && tok[0] == "scheme") {
                if (tok[1] == "constant") f.selector = FitScheme::Constant;
                else if (tok[1] == "vanilla") f.selector = FitScheme::SetSize;
                else if (tok[1] == "oracle") f.selector = FitScheme::Oracle;
                else if (tok[1] == "two-step") f.selector = FitScheme::TwoStep;
                else throw ParseError(line_no, "unknown scheme '" + tok[1] + "'");
            } else if (tok.size() == 2 && tok[0] == "d") {
                f.d = std::stod(tok[1]);
            } else if (tok.size() == 2 && tok[0] == "iterations") {
                f.iterations = std::stoi(tok[1]);
            } else if (tok.size() == 2 && tok[0] == "residual") {
                f.residual = std::stod(tok[1]);
            } else if (tok.size() == 4 && tok[0] == "item") {
                in_rows = true;  // header row
            } else {
                throw ParseError(line_no, "unexpected row in fit file");
            }
            continue;
        }
        if (tok.size() != 4) throw ParseError(line_no, "fit row needs 4 columns");
        f.theta.push_back(std::stod(tok[2]));
        f.pi_hat.push_back(std::stod(tok[3]));
    }
    if (f.theta.empty()) throw ValidationError("fit file has no item rows");
    return f;
}

// Reads a plain score vector: either one number per line or item,theta rows
// (a fit CSV also works). Used by --scheme oracle:<file>.
inline std::vector<double> read_theta_file(std::istream& in) {
    std::vector<std::pair<long, double>> indexed;
    std::vector<double> plain;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        const std::vector<std::string> tok = detail::split(s, ',');
        try {
            if (tok.size() == 1) {
                plain.push_back(std::stod(tok[0]));
            } else if (tok.size() >= 3 && tok[0] == "item") {
                continue;  // fit CSV header
            } else if (tok.size() == 2 &&
                       (tok[0] == "scheme" || tok[0] == "d" || tok[0] == "iterations" ||
                        tok[0] == "residual")) {
                continue;  // fit CSV metadata
            } else if (tok.size() >= 3) {
                indexed.emplace_back(std::stol(tok[0]), std::stod(tok[2]));
            } else {
                indexed.emplace_back(std::stol(tok[0]), std::stod(tok[1]));
            }
        } catch (const std::exception&) {
            throw ParseError(line_no, "cannot parse score row '" + s + "'");
        }
    }
    if (!indexed.empty()) {
        std::vector<double> out(indexed.size());
        for (const auto& [i, v] : indexed) {
            if (i < 0 || std::size_t(i) >= out.size())
                throw ValidationError("score file indices are not 0..n-1");
            out[std::size_t(i)] = v;
        }
        return out;
    }
    if (plain.empty()) throw ValidationError("score file is empty");
    return plain;
}

inline const char* side_name(Side s) {
    return s == Side::two_sided ? "two-sided" : "one-sided";
}

inline void write_interval_csv(std::ostream& out, const ComparisonDataset& ds,
                               const SpectralFit& f, const std::vector<RankInterval>& cis) {
    const std::vector<std::uint32_t> ranks = point_ranks(f.theta);
    out << "item,theta,rank,lower,upper,alpha,side\n";
    for (const RankInterval& r : cis) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.6f", f.theta[r.item]);
        out << ds.label_of(r.item) << "," << buf << "," << ranks[r.item] << "," << r.lower << ","
            << r.upper << "," << r.alpha << "," << side_name(r.side) << "\n";
    }
}

} // namespace specrank
