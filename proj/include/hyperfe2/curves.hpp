#pragma once

// Homogenized stress-strain curves, their CSV form and the trajectory error
//   max_chi ||sigma_ref - sigma||_inf / ||sigma_ref||_inf   (chi = 0 skipped).

#include "hyperfe2/common.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace hyperfe2 {

struct StressCurve {
    std::vector<double> chi;
    std::vector<VoigtVector> strain;
    std::vector<VoigtVector> stress;
    std::vector<double> max_damage;

    int size() const { return static_cast<int>(chi.size()); }
    int n_sigma() const { return strain.empty() ? 0 : static_cast<int>(strain.front().size()); }

    void push(double c, const VoigtVector& eps, const VoigtVector& sig, double d) {
        chi.push_back(c);
        strain.push_back(eps);
        stress.push_back(sig);
        max_damage.push_back(d);
    }
};

// Builds a curve from any step type exposing macro_strain, homogenized_stress and
// max_damage(); chi values are supplied by the caller.
template <class Step>
StressCurve make_curve(const std::vector<double>& chi, const std::vector<Step>& steps) {
    if (chi.size() != steps.size()) throw AlignmentError("make_curve: chi and steps differ in length");
    StressCurve c;
    for (std::size_t k = 0; k < steps.size(); ++k)
        c.push(chi[k], steps[k].macro_strain, steps[k].homogenized_stress, steps[k].max_damage());
    return c;
}

inline std::vector<double> monotone_schedule(double chi_end, int n_steps) {
    if (n_steps < 1) throw ConfigError("schedule needs at least one step");
    std::vector<double> out;
    for (int k = 1; k <= n_steps; ++k) out.push_back(chi_end * k / n_steps);
    return out;
}

// 0 -> chi_end -> 0 with n_steps increments on each branch (chi = 0 at the end).
inline std::vector<double> cyclic_schedule(double chi_end, int n_steps) {
    std::vector<double> out = monotone_schedule(chi_end, n_steps);
    for (int k = n_steps - 1; k >= 0; --k) out.push_back(chi_end * k / n_steps);
    return out;
}

inline double trajectory_error(const StressCurve& reference, const StressCurve& reduced) {
    if (reference.size() != reduced.size()) throw AlignmentError("trajectory_error: curves differ in length");
    double worst = 0.0;
    bool any = false;
    for (int k = 0; k < reference.size(); ++k) {
        if (std::abs(reference.chi[k] - reduced.chi[k]) > 1e-12 * (1.0 + std::abs(reference.chi[k])))
            throw AlignmentError("trajectory_error: chi values differ at step " + std::to_string(k));
        if (reference.chi[k] == 0.0) continue;
        const double denom = reference.stress[k].cwiseAbs().maxCoeff();
        if (denom == 0.0) continue;
        any = true;
        worst = std::max(worst, (reference.stress[k] - reduced.stress[k]).cwiseAbs().maxCoeff() / denom);
    }
    if (!any) throw UndefinedErrorMetric("trajectory_error: reference curve is zero everywhere");
    return worst;
}

namespace detail {

inline const char* voigt_label(int n_sigma, int i) {
    static const char* two[] = {"xx", "yy", "xy"};
    static const char* three[] = {"xx", "yy", "zz", "xy", "yz", "xz"};
    return n_sigma == 3 ? two[i] : three[i];
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw FormatError("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw FormatError("trailing characters in number: '" + s + "'");
    return v;
}

}  // namespace detail

// Columns: chi, eps_<c>..., sigma_<c>..., max_damage.
inline void write_curve_csv(std::ostream& os, const StressCurve& curve) {
    const int ns = curve.n_sigma();
    os << "chi";
    for (int i = 0; i < ns; ++i) os << ",eps_" << detail::voigt_label(ns, i);
    for (int i = 0; i < ns; ++i) os << ",sigma_" << detail::voigt_label(ns, i);
    os << ",max_damage\r\n";
    os << std::setprecision(17);
    for (int k = 0; k < curve.size(); ++k) {
        os << curve.chi[k];
        for (int i = 0; i < ns; ++i) os << "," << curve.strain[k](i);
        for (int i = 0; i < ns; ++i) os << "," << curve.stress[k](i);
        os << "," << curve.max_damage[k] << "\r\n";
    }
}

inline StressCurve read_curve_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("curve CSV is empty");
    const auto header = detail::split_csv_line(line);
    const int cols = static_cast<int>(header.size());
    if (cols != 8 && cols != 14) throw FormatError("curve CSV has " + std::to_string(cols) + " columns");
    const int ns = (cols - 2) / 2;
    StressCurve c;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (static_cast<int>(f.size()) != cols) throw FormatError("curve CSV row has wrong field count");
        VoigtVector e(ns), s(ns);
        for (int i = 0; i < ns; ++i) {
            e(i) = detail::parse_double(f[1 + i]);
            s(i) = detail::parse_double(f[1 + ns + i]);
        }
        c.push(detail::parse_double(f[0]), e, s, detail::parse_double(f[cols - 1]));
    }
    return c;
}

inline void save_curve(const std::string& path, const StressCurve& curve) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot write " + path);
    write_curve_csv(os, curve);
}

inline StressCurve load_curve(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    return read_curve_csv(is);
}

// Generic RFC-4180 table writer for reports.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) {
        if (row.size() != header_.size()) throw ConfigError("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    static std::string num(double v) {
        std::ostringstream os;
        os << std::setprecision(12) << v;
        return os.str();
    }

    void write(std::ostream& os) const {
        write_row(os, header_);
        for (const auto& r : rows_) write_row(os, r);
    }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw FormatError("cannot write " + path);
        write(os);
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    static CsvTable read(std::istream& is) {
        std::string line;
        if (!std::getline(is, line)) throw FormatError("csv is empty");
        CsvTable t(detail::split_csv_line(line));
        while (std::getline(is, line)) {
            if (line.empty() || line == "\r") continue;
            t.add_row(detail::split_csv_line(line));
        }
        return t;
    }

private:
    static void write_row(std::ostream& os, const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            const std::string& f = row[i];
            if (f.find_first_of(",\"\r\n") != std::string::npos) {
                os << '"';
                for (char ch : f) os << (ch == '"' ? "\"\"" : std::string(1, ch));
                os << '"';
            } else {
                os << f;
            }
        }
        os << "\r\n";
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace hyperfe2
