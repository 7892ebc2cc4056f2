#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "heliquad/bundled_polars.hpp"
#include "heliquad/errors.hpp"

namespace heliquad {

struct PolarRow {
    double alpha_deg;
    double cl;
    double cd;
};

/// Lift and drag coefficients tabulated against angle of attack at a single
/// Reynolds number. Immutable once constructed; the constructor enforces the
/// table invariants.
class AirfoilPolar {
public:
    static constexpr double k_required_min_alpha = -15.0;
    static constexpr double k_required_max_alpha = 15.0;
    static constexpr double k_prestall_lo = -5.0;
    static constexpr double k_prestall_hi = 8.0;

    AirfoilPolar(std::string name, std::vector<PolarRow> rows, double reynolds = 1.0e5)
        : name_(std::move(name)), reynolds_(reynolds), rows_(std::move(rows)) {
        validate();
    }

    const std::string& name() const noexcept { return name_; }
    double reynolds() const noexcept { return reynolds_; }
    const std::vector<PolarRow>& rows() const noexcept { return rows_; }
    double min_alpha() const noexcept { return rows_.front().alpha_deg; }
    double max_alpha() const noexcept { return rows_.back().alpha_deg; }

    double lift_coeff(double alpha_deg) const { return interpolate(alpha_deg, &PolarRow::cl); }
    double drag_coeff(double alpha_deg) const { return interpolate(alpha_deg, &PolarRow::cd); }

    double min_drag() const {
        return std::min_element(rows_.begin(), rows_.end(),
                                [](const PolarRow& a, const PolarRow& b) { return a.cd < b.cd; })
            ->cd;
    }

private:
    void validate() const {
        if (rows_.size() < 2) throw ValidationError("polar '" + name_ + "' needs at least two rows");
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto& r = rows_[i];
            if (!std::isfinite(r.alpha_deg) || !std::isfinite(r.cl) || !std::isfinite(r.cd))
                throw ValidationError("polar '" + name_ + "' row " + std::to_string(i) + " is not finite");
            if (r.cd <= 0.0)
                throw ValidationError("polar '" + name_ + "' row " + std::to_string(i) + " has non-positive cd");
            if (i > 0 && !(r.alpha_deg > rows_[i - 1].alpha_deg))
                throw ValidationError("polar '" + name_ + "' alpha not strictly increasing at row " +
                                      std::to_string(i));
        }
        if (min_alpha() > k_required_min_alpha || max_alpha() < k_required_max_alpha)
            throw ValidationError("polar '" + name_ + "' must cover [-15, 15] deg");
        for (std::size_t i = 1; i < rows_.size(); ++i) {
            const auto& a = rows_[i - 1];
            const auto& b = rows_[i];
            if (a.alpha_deg >= k_prestall_lo && b.alpha_deg <= k_prestall_hi && b.cl < a.cl)
                throw ValidationError("polar '" + name_ + "' lift decreases inside [-5, 8] deg");
        }
    }

    double interpolate(double alpha_deg, double PolarRow::*field) const {
        if (!(alpha_deg >= min_alpha() && alpha_deg <= max_alpha()))
            throw RangeError("alpha " + std::to_string(alpha_deg) + " deg outside polar '" + name_ + "' range");
        auto hi = std::lower_bound(rows_.begin(), rows_.end(), alpha_deg,
                                   [](const PolarRow& r, double a) { return r.alpha_deg < a; });
        if (hi->alpha_deg == alpha_deg) return (*hi).*field;
        auto lo = std::prev(hi);
        const double t = (alpha_deg - lo->alpha_deg) / (hi->alpha_deg - lo->alpha_deg);
        return (*lo).*field + t * ((*hi).*field - (*lo).*field);
    }

    std::string name_;
    double reynolds_;
    std::vector<PolarRow> rows_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view tok, double& out) {
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace detail

/// Parses the "alpha cl cd" column format. Lines starting with '#' and blank
/// lines are skipped.
inline AirfoilPolar load_polar(std::string_view source, std::string name = "polar") {
    std::vector<PolarRow> rows;
    std::size_t line_no = 0;
    while (!source.empty()) {
        const auto nl = source.find('\n');
        auto line = detail::trim(source.substr(0, nl));
        source = nl == std::string_view::npos ? std::string_view{} : source.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        double vals[3];
        int count = 0;
        while (!line.empty()) {
            const auto sp = line.find_first_of(" \t");
            const auto tok = line.substr(0, sp);
            if (count == 3 || !detail::parse_double(tok, vals[count]))
                throw ParseError("polar '" + name + "' line " + std::to_string(line_no) + ": malformed row");
            ++count;
            line = sp == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(sp));
        }
        if (count != 3)
            throw ParseError("polar '" + name + "' line " + std::to_string(line_no) + ": expected 3 columns");
        rows.push_back({vals[0], vals[1], vals[2]});
    }
    return AirfoilPolar(std::move(name), std::move(rows));
}

inline AirfoilPolar load_polar_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open polar file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_polar(ss.str(), path.stem().string());
}

/// "symmetric" and "cambered" resolve to the bundled tables; anything else is
/// treated as a file path.
inline AirfoilPolar resolve_polar(const std::string& name_or_path) {
    if (name_or_path == "symmetric") return load_polar(bundled::k_symmetric_polar, "symmetric");
    if (name_or_path == "cambered") return load_polar(bundled::k_cambered_polar, "cambered");
    return load_polar_file(name_or_path);
}

inline double lift_coeff(const AirfoilPolar& polar, double alpha_deg) { return polar.lift_coeff(alpha_deg); }
inline double drag_coeff(const AirfoilPolar& polar, double alpha_deg) { return polar.drag_coeff(alpha_deg); }

/// Zero-lift angle of attack: root of the interpolated lift curve on the first
/// upward crossing, refined by bisection to |cl| < 1e-6.
inline double alpha_zero_lift(const AirfoilPolar& polar) {
    const auto& rows = polar.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].cl == 0.0) return rows[i].alpha_deg;
        if (i + 1 < rows.size() && rows[i].cl < 0.0 && rows[i + 1].cl > 0.0) {
            double lo = rows[i].alpha_deg;
            double hi = rows[i + 1].alpha_deg;
            double mid = 0.5 * (lo + hi);
            for (int it = 0; it < 200; ++it) {
                mid = 0.5 * (lo + hi);
                const double cl = polar.lift_coeff(mid);
                if (std::abs(cl) < 1e-6) break;
                (cl < 0.0 ? lo : hi) = mid;
            }
            return mid;
        }
    }
    throw NotFoundError("polar '" + polar.name() + "' has no zero-lift crossing");
}

}  // namespace heliquad
