#include "ffbs/mathkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ffbs/errors.hpp"

namespace ffbs {

double sig_pow(double x, double m) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), m), x);
}

void FourierBasis::validate() const {
    if (term_count < 1 || term_count % 2 == 0)
        throw ConfigError("fourier term_count must be an odd integer >= 1");
    if (!(period > 0.0)) throw ConfigError("fourier period must be > 0");
}

Eigen::VectorXd FourierBasis::eval(double t) const {
    Eigen::VectorXd rho(term_count);
    rho(0) = 1.0;
    const double w0 = 2.0 * std::numbers::pi / period;
    for (int r = 1; 2 * r < term_count; ++r) {
        const double a = w0 * r * t;
        rho(2 * r - 1) = std::numbers::sqrt2 * std::sin(a);
        rho(2 * r) = std::numbers::sqrt2 * std::cos(a);
    }
    return rho;
}

Eigen::VectorXd fse_eval(const Eigen::MatrixXd& l_hat, const Eigen::VectorXd& rho) {
    if (l_hat.rows() != rho.size())
        throw ConfigError("fse_eval: l_hat row count must equal basis length");
    return l_hat.transpose() * rho;
}

void FseRbfEstimator::validate() const {
    fourier.validate();
    if (state_dim < 1) throw ConfigError("estimator state_dim must be >= 1");
    if (param_dim < 1) throw ConfigError("estimator param_dim must be >= 1");
    if (centers.rows() < 1) throw ConfigError("estimator needs at least one node");
    if (centers.cols() != state_dim + param_dim)
        throw ConfigError("estimator center dimension must equal state_dim + param_dim");
    if (widths.size() != centers.rows())
        throw ConfigError("estimator widths count must equal node count");
    if (!(widths.minCoeff() > 0.0)) throw ConfigError("estimator widths must all be > 0");
}

Eigen::VectorXd FseRbfEstimator::eval(const Eigen::VectorXd& state,
                                      const Eigen::VectorXd& p_hat) const {
    Eigen::VectorXd x(state_dim + param_dim);
    x << state, p_hat;
    const Eigen::ArrayXd d2 = (centers.rowwise() - x.transpose()).rowwise().squaredNorm();
    return (-d2 / widths.array().square()).exp();
}

Eigen::MatrixXd FseRbfEstimator::grad_p(const Eigen::VectorXd& state,
                                        const Eigen::VectorXd& p_hat) const {
    Eigen::VectorXd h;
    Eigen::MatrixXd g;
    eval_with_grad(state, p_hat, h, g);
    return g;
}

void FseRbfEstimator::eval_with_grad(const Eigen::VectorXd& state,
                                     const Eigen::VectorXd& p_hat, Eigen::VectorXd& h,
                                     Eigen::MatrixXd& h_grad) const {
    Eigen::VectorXd x(state_dim + param_dim);
    x << state, p_hat;
    // diff row j = c_j - x, so dH_j/dp = (2 H_j / w_j^2) (c_j,p - p).
    const Eigen::MatrixXd diff = centers.rowwise() - x.transpose();
    const Eigen::ArrayXd w2 = widths.array().square();
    h = (-diff.rowwise().squaredNorm().array() / w2).exp();
    h_grad = diff.rightCols(param_dim).array().colwise() * (2.0 * h.array() / w2);
}

void SwitchRegion::validate() const {
    if (!(inner_bound > 0.0)) throw ConfigError("switch region inner_bound must be > 0");
    if (!(outer_bound > inner_bound))
        throw ConfigError("switch region needs inner_bound < outer_bound");
    if (smooth_order < 1) throw ConfigError("switch region smooth_order must be >= 1");
}

double smooth_switch(double x, const SwitchRegion& region) {
    const double ax = std::abs(x);
    if (ax <= region.inner_bound) return 1.0;
    if (ax >= region.outer_bound) return 0.0;
    const double c1sq = region.inner_bound * region.inner_bound;
    const double c2sq = region.outer_bound * region.outer_bound;
    const double half_pi = std::numbers::pi / 2.0;
    const double frac = (x * x - c1sq) / (c2sq - c1sq);
    const double inner = std::pow(std::sin(half_pi * frac), region.smooth_order);
    return std::pow(std::cos(half_pi * inner), region.smooth_order);
}

double switch_indicator(std::span<const double> states, std::span<const double> p_hat,
                        std::span<const SwitchRegion> state_regions,
                        std::span<const SwitchRegion> param_regions) {
    if (states.size() != state_regions.size() || p_hat.size() != param_regions.size())
        throw ConfigError("switch_indicator: one region per state and parameter component");
    double w = 1.0;
    for (size_t j = 0; j < states.size(); ++j) w *= smooth_switch(states[j], state_regions[j]);
    for (size_t j = 0; j < p_hat.size(); ++j) w *= smooth_switch(p_hat[j], param_regions[j]);
    return w;
}

double psi(double sigma, double m_c, double tau, double eps) {
    if (sigma == 0.0) return 0.0;
    const double a = std::abs(sigma);
    const double b = std::pow(a, 1.0 + m_c);  // so b^2 = |sigma|^(2+2mc)
    const double t2 = tau * tau;
    const double e2 = eps * eps;
    double scaled;  // b * sqrt((b^2+t2+e2)/((b^2+t2)(b^2+e2))), kept finite for large b
    if (b <= 1.0) {
        const double b2 = b * b;
        scaled = b * std::sqrt((b2 + t2 + e2) / ((b2 + t2) * (b2 + e2)));
    } else {
        const double inv = 1.0 / (b * b);
        scaled = std::sqrt((1.0 + (t2 + e2) * inv) / ((1.0 + t2 * inv) * (1.0 + e2 * inv)));
    }
    return std::copysign(std::pow(a, m_c) * scaled, sigma);
}

double lemma2_tanh_gap(double sigma, double kappa) {
    return std::abs(sigma) - sigma * std::tanh(sigma / kappa);
}

double lemma2_radical_gap(double sigma, double tau, double eps) {
    const double s2 = sigma * sigma;
    const double t2 = tau * tau;
    const double e2 = eps * eps;
    return std::abs(sigma) - s2 * std::sqrt((s2 + t2 + e2) / ((s2 + t2) * (s2 + e2)));
}

bool lemma3_power_sum_check(const Eigen::VectorXd& z, double beta, double slack) {
    if (z.size() == 0) throw ConfigError("lemma3_power_sum_check: z must be nonempty");
    const Eigen::ArrayXd a = z.array().abs();
    const double sum_pow = a.pow(beta).sum();
    const double pow_sum = std::pow(a.sum(), beta);
    const double upper = std::pow(static_cast<double>(z.size()), 1.0 - beta) * pow_sum;
    return pow_sum <= sum_pow + slack && sum_pow <= upper + slack;
}

std::pair<double, double> lemma4_betas(double m_c) {
    const double b1 =
        (std::pow(2.0, m_c - 1.0) - std::pow(2.0, (m_c - 1.0) * (m_c + 1.0))) / (1.0 + m_c);
    const double b2 = ((2.0 * m_c + 1.0) / (m_c + 1.0) +
                       std::pow(2.0, -(m_c - 1.0) * (m_c - 1.0) * (m_c + 1.0)) / (m_c + 1.0) -
                       std::pow(2.0, m_c - 1.0)) /
                      (1.0 + m_c);
    return {b1, b2};
}

bool lemma4_check(double chi_tilde, double chi, int m_c1, int m_c2, double slack) {
    if (m_c1 <= 0 || m_c2 <= 0 || m_c1 % 2 == 0 || m_c2 % 2 == 0 || m_c2 >= m_c1)
        throw ConfigError("lemma4_check: exponents must be odd positive with m_c2 < m_c1");
    const double m_c = static_cast<double>(m_c2) / static_cast<double>(m_c1);
    const auto [b1, b2] = lemma4_betas(m_c);
    // m_c has odd/odd parity (signed power); 1+m_c has even/odd parity (absolute power).
    const double lhs = chi_tilde * sig_pow(chi - chi_tilde, m_c);
    const double rhs = -b1 * std::pow(std::abs(chi_tilde), 1.0 + m_c) +
                       b2 * std::pow(std::abs(chi), 1.0 + m_c);
    return lhs <= rhs + slack;
}

double settling_time_bound(double v1, double v2, double m, double nu, double V0) {
    if (!(v1 > 0.0) || !(v2 > 0.0)) throw ConfigError("settling_time_bound: v1, v2 must be > 0");
    if (!(m > 0.0 && m < 1.0)) throw ConfigError("settling_time_bound: m must be in (0, 1)");
    if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("settling_time_bound: nu must be in (0, 1)");
    if (!(V0 >= 0.0)) throw ConfigError("settling_time_bound: V0 must be >= 0");
    const double p = 1.0 - m;
    const double v0p = std::pow(V0, p);
    const double t1 = std::log((nu * v1 * v0p + v2) / v2) / (nu * v1 * p);
    const double t2 = std::log((v1 * v0p + nu * v2) / (nu * v2)) / (v1 * p);
    return std::max(t1, t2);
}

double residual_bound(double v1, double v2, double v3, double m, double nu) {
    if (!(v1 > 0.0) || !(v2 > 0.0) || !(v3 >= 0.0))
        throw ConfigError("residual_bound: v1, v2 must be > 0 and v3 >= 0");
    if (!(m > 0.0 && m < 1.0)) throw ConfigError("residual_bound: m must be in (0, 1)");
    if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("residual_bound: nu must be in (0, 1)");
    const double lin = v3 / ((1.0 - nu) * v1);
    const double frac = std::pow(v3 / ((1.0 - nu) * v2), 1.0 / m);
    return std::min(lin, frac);
}

Eigen::MatrixXd grid_centers(const std::vector<std::pair<double, double>>& ranges,
                             int per_dim) {
    if (ranges.empty()) throw ConfigError("grid_centers: at least one range required");
    if (per_dim < 1) throw ConfigError("grid_centers: per_dim must be >= 1");
    for (const auto& [lo, hi] : ranges)
        if (!(lo < hi)) throw ConfigError("grid_centers: each range needs low < high");
    const int dims = static_cast<int>(ranges.size());
    Eigen::Index rows = 1;
    for (int d = 0; d < dims; ++d) rows *= per_dim;
    Eigen::MatrixXd out(rows, dims);
    for (Eigen::Index idx = 0; idx < rows; ++idx) {
        Eigen::Index rem = idx;
        for (int d = dims - 1; d >= 0; --d) {
            const auto k = static_cast<double>(rem % per_dim);
            rem /= per_dim;
            const auto& [lo, hi] = ranges[d];
            out(idx, d) =
                per_dim == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (per_dim - 1);
        }
    }
    return out;
}

}  // namespace ffbs
