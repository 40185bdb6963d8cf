#include "ffbs/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ffbs/errors.hpp"

namespace ffbs {

namespace {

std::string num17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string num6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

}  // namespace

std::string trace_csv_header(const Trace& trace) {
    std::string h = "t";
    for (int i = 1; i <= trace.order; ++i) h += ",eta" + std::to_string(i);
    h += ",y_d,xi1,u";
    for (size_t e = 0; e < trace.est_steps.size(); ++e) {
        const std::string s = std::to_string(trace.est_steps[e]);
        h += ",w" + s;
        if (trace.p_hat[e].size() == 1) {
            h += ",p_hat" + s;
        } else {
            for (size_t j = 1; j <= trace.p_hat[e].size(); ++j)
                h += ",p_hat" + s + "_" + std::to_string(j);
        }
        h += ",e_F" + s + ",s_n" + s;
    }
    for (int i = 1; i <= trace.order; ++i) h += ",delta" + std::to_string(i);
    for (int step : trace.est_steps) h += ",omega_norm" + std::to_string(step);
    return h;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
    auto out = open_out(path);
    out << trace_csv_header(trace) << '\n';
    std::string line;
    for (size_t s = 0; s < trace.samples(); ++s) {
        line.clear();
        line += num17(trace.t[s]);
        for (int i = 0; i < trace.order; ++i) line += ',' + num17(trace.eta[i][s]);
        line += ',' + num17(trace.y_d[s]);
        line += ',' + num17(trace.xi1[s]);
        line += ',' + num17(trace.u[s]);
        for (size_t e = 0; e < trace.est_steps.size(); ++e) {
            line += ',' + num17(trace.w[e][s]);
            for (const auto& col : trace.p_hat[e]) line += ',' + num17(col[s]);
            line += ',' + num17(trace.approx_error[e][s]);
            line += ',' + num17(trace.s_n[e][s]);
        }
        for (int i = 0; i < trace.order; ++i) line += ',' + num17(trace.delta[i][s]);
        for (size_t e = 0; e < trace.est_steps.size(); ++e)
            line += ',' + num17(trace.omega_norm[e][s]);
        out << line << '\n';
    }
}

void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw ConfigError("svg plot needs equally sized, nonempty series");

    constexpr int kWidth = 960, kHeight = 540;
    constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 40;
    constexpr size_t kMaxPoints = 2000;

    double x_lo = x[0], x_hi = x[0], y_lo = y[0], y_hi = y[0];
    for (size_t i = 1; i < x.size(); ++i) {
        x_lo = std::min(x_lo, x[i]);
        x_hi = std::max(x_hi, x[i]);
        y_lo = std::min(y_lo, y[i]);
        y_hi = std::max(y_hi, y[i]);
    }
    const double x_span = x_hi > x_lo ? x_hi - x_lo : 1.0;
    const double y_span = y_hi > y_lo ? y_hi - y_lo : 1.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const size_t stride = std::max<size_t>(1, x.size() / kMaxPoints);

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num6(plot_w)
        << "\" height=\"" << num6(plot_h)
        << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"monospace\" font-size=\"16\">" << title << "</text>\n";

    out << "<polyline fill=\"none\" stroke=\"#0057b7\" stroke-width=\"1.2\" points=\"";
    bool first = true;
    auto emit = [&](size_t i) {
        const double px = kLeft + (x[i] - x_lo) / x_span * plot_w;
        const double py = kTop + (y_hi - y[i]) / y_span * plot_h;
        if (!first) out << ' ';
        out << num6(px) << ',' << num6(py);
        first = false;
    };
    for (size_t i = 0; i < x.size(); i += stride) emit(i);
    if ((x.size() - 1) % stride != 0) emit(x.size() - 1);
    out << "\"/>\n";

    out << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 12
        << "\" font-family=\"monospace\" font-size=\"12\">x: [" << num6(x_lo) << ", "
        << num6(x_hi) << "]</text>\n";
    out << "<text x=\"" << kWidth / 2 + 40 << "\" y=\"" << kHeight - 12
        << "\" font-family=\"monospace\" font-size=\"12\">y: [" << num6(y_lo) << ", "
        << num6(y_hi) << "]</text>\n";
    out << "</svg>\n";
}

}  // namespace ffbs
