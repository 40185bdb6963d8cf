#pragma once

#include <string>
#include <vector>

namespace ffbs {

// Column-oriented log of one closed-loop run. Per-estimator blocks are
// aligned with est_steps (1-based step indices). approx_error is
// F_i(true) - w_i * omega_hat . h, the quantity the estimator is meant to
// reproduce inside its valid region.
struct Trace {
    int order = 0;
    std::vector<int> est_steps;

    std::vector<double> t;
    std::vector<std::vector<double>> eta;    // [order][samples]
    std::vector<double> y_d;
    std::vector<double> xi1;
    std::vector<double> u;
    std::vector<std::vector<double>> delta;  // [order][samples]

    std::vector<std::vector<double>> w;                        // [est][samples]
    std::vector<std::vector<std::vector<double>>> p_hat;       // [est][param][samples]
    std::vector<std::vector<double>> approx_error;             // [est][samples]
    std::vector<std::vector<double>> s_n;                      // [est][samples]
    std::vector<std::vector<double>> omega_norm;               // [est][samples]

    size_t samples() const { return t.size(); }
};

// CSV layout: t, eta1..etan, y_d, xi1, u, then per estimator step i the block
// w{i}, p_hat{i}, e_F{i}, s_n{i}, then delta1..deltan, then omega_norm{i} per
// estimator step. Values use 17 significant digits and LF line endings.
std::string trace_csv_header(const Trace& trace);
void write_trace_csv(const Trace& trace, const std::string& path);

// Minimal self-contained line plot: fixed 960x540 viewport, polyline series,
// min/max annotations, long series decimated by stride. Deterministic bytes.
void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ffbs
