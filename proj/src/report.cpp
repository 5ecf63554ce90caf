#include "kbie/error.hpp"
#include "kbie/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace kbie {

namespace {

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_number(const std::string& field, int line) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (field.empty() || end != begin + field.size())
        throw IoError("CSV line " + std::to_string(line) + ": invalid number '" + field + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

double column_value(const SweepRecord& r, const std::string& column) {
    if (column == "k") return r.k;
    if (column == "n_dofs") return static_cast<double>(r.n_dofs);
    if (column == "norm_L2") return r.norm_L2;
    if (column == "norm_Hk") return r.norm_Hk;
    if (column == "invnorm_Hk") return r.invnorm_Hk;
    if (column == "cond_Hk") return r.cond_Hk;
    if (column == "sigma_min") return r.sigma_min;
    if (column == "sigma_max") return r.sigma_max;
    if (column == "envelope") return r.envelope.value_or(std::numeric_limits<double>::quiet_NaN());
    if (column == "wall_ms") return r.wall_ms;
    throw DomainError("unknown column '" + column + "'");
}

void emit_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    if (records.empty()) throw DomainError("emit_csv: no records");
    os << kCsvHeader << '\n';
    for (const auto& r : records) {
        os << number(r.k) << ',' << r.n_dofs << ',' << number(r.norm_L2) << ',' << number(r.norm_Hk) << ','
           << number(r.invnorm_Hk) << ',' << number(r.cond_Hk) << ',' << number(r.sigma_min) << ','
           << number(r.sigma_max) << ',' << (r.envelope ? number(*r.envelope) : std::string()) << ','
           << number(r.wall_ms) << '\n';
    }
    if (!os) throw IoError("emit_csv: write failed");
}

void emit_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records) {
    std::ostringstream ss;
    emit_csv(ss, records);
    auto out = open_out(path);
    out << ss.str();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

std::vector<SweepRecord> parse_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw IoError("CSV: unexpected header '" + line + "'");
    std::vector<SweepRecord> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != 10) throw IoError("CSV line " + std::to_string(lineno) + ": expected 10 fields");
        SweepRecord r;
        r.k = parse_number(f[0], lineno);
        const double n = parse_number(f[1], lineno);
        if (!(n >= 0.0) || n != std::floor(n)) throw IoError("CSV line " + std::to_string(lineno) + ": bad n_dofs");
        r.n_dofs = static_cast<Eigen::Index>(n);
        r.norm_L2 = parse_number(f[2], lineno);
        r.norm_Hk = parse_number(f[3], lineno);
        r.invnorm_Hk = parse_number(f[4], lineno);
        r.cond_Hk = parse_number(f[5], lineno);
        r.sigma_min = parse_number(f[6], lineno);
        r.sigma_max = parse_number(f[7], lineno);
        if (!f[8].empty()) r.envelope = parse_number(f[8], lineno);
        r.wall_ms = parse_number(f[9], lineno);
        out.push_back(r);
    }
    return out;
}

std::vector<SweepRecord> parse_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    return parse_csv(in);
}

void emit_plot(std::ostream& os, const std::vector<SweepRecord>& records, const std::vector<std::string>& columns) {
    if (records.empty()) throw DomainError("emit_plot: no records");
    const double width = 720, height = 480, left = 80, right = 170, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;

    double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
    double vmin = kmin, vmax = -kmin;
    for (const auto& r : records) {
        if (!(r.k > 0.0) || !std::isfinite(r.k)) continue;
        for (const auto& c : columns) {
            const double v = column_value(r, c);
            if (!(v > 0.0) || !std::isfinite(v)) continue;
            kmin = std::min(kmin, r.k);
            kmax = std::max(kmax, r.k);
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    const bool any = std::isfinite(kmin);
    double lk0 = any ? std::log10(kmin) : 0.0, lk1 = any ? std::log10(kmax) : 1.0;
    double lv0 = any ? std::floor(std::log10(vmin)) : 0.0, lv1 = any ? std::ceil(std::log10(vmax)) : 1.0;
    if (lk1 - lk0 < 1e-9) {
        lk0 -= 0.5;
        lk1 += 0.5;
    }
    if (lv1 - lv0 < 1.0) lv1 = lv0 + 1.0;
    auto px = [&](double k) { return left + pw * (std::log10(k) - lk0) / (lk1 - lk0); };
    auto py = [&](double v) { return top + ph * (1.0 - (std::log10(v) - lv0) / (lv1 - lv0)); };

    const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    char buf[256];
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n",
                  width, height, width, height);
    os << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                  left, top, pw, ph);
    os << buf;
    for (int e = static_cast<int>(lv0); e <= static_cast<int>(lv1); ++e) {
        const double y = py(std::pow(10.0, e));
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#ddd\"/>"
                      "<text x=\"%g\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">1e%d</text>\n",
                      left, y, left + pw, y, left - 6, y + 4, e);
        os << buf;
    }
    for (int e = static_cast<int>(std::ceil(lk0 - 1e-12)); e <= static_cast<int>(std::floor(lk1 + 1e-12)); ++e) {
        for (int m = 1; m <= 9; ++m) {
            const double k = m * std::pow(10.0, e);
            if (std::log10(k) < lk0 - 1e-12 || std::log10(k) > lk1 + 1e-12) continue;
            std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#eee\"/>\n", px(k),
                          top, px(k), top + ph);
            os << buf;
        }
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%s</text>"
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%s</text>\n",
                  left, top + ph + 16, number(std::pow(10.0, lk0)).c_str(), left + pw, top + ph + 16,
                  number(std::pow(10.0, lk1)).c_str());
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\">wavenumber k (log scale)</text>\n"
                  "<text x=\"18\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 %g)\">"
                  "value (log scale)</text>\n",
                  left + pw / 2, height - 18, top + ph / 2, top + ph / 2);
    os << buf;

    for (std::size_t c = 0; c < columns.size(); ++c) {
        const char* color = palette[c % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& r : records) {
            const double v = column_value(r, columns[c]);
            if (!(v > 0.0) || !std::isfinite(v) || !(r.k > 0.0) || !std::isfinite(r.k)) continue;
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(r.k), py(v));
            os << buf;
            first = false;
        }
        os << "\"/>\n";
        const double ly = top + 16 + 18 * static_cast<double>(c);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>"
                      "<text x=\"%g\" y=\"%g\" font-size=\"12\">",
                      left + pw + 12, ly, left + pw + 36, ly, color, left + pw + 42, ly + 4);
        os << buf << columns[c] << "</text>\n";
    }
    os << "</svg>\n";
    if (!os) throw IoError("emit_plot: write failed");
}

void emit_plot(const std::filesystem::path& path, const std::vector<SweepRecord>& records,
               const std::vector<std::string>& columns) {
    std::ostringstream ss;
    emit_plot(ss, records, columns);
    auto out = open_out(path);
    out << ss.str();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

void write_scaling_report(std::ostream& os, const ScalingReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "slope norm_Hk %.6f\nslope invnorm_Hk %.6f\nslope cond_Hk %.6f\n",
                  report.norm_Hk.exponent, report.invnorm_Hk.exponent, report.cond_Hk.exponent);
    os << buf;
    for (const auto& c : report.checks) {
        std::snprintf(buf, sizeof buf, "%s %s %.6g (target %s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                      c.target.c_str());
        os << buf;
    }
    os << (report.pass() ? "overall PASS\n" : "overall FAIL\n");
    os << "note: Hk quantities use the damped-kernel V_k surrogate norm\n";
}

}  // namespace kbie
