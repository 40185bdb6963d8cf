#include "ffbs/controller.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "ffbs/errors.hpp"
#include "ffbs/mathkit.hpp"

namespace ffbs {

namespace {

void require_positive(double v, int step, const char* name) {
    if (!(v > 0.0))
        throw ConfigError("step " + std::to_string(step) + " gain " + name + " must be > 0");
}

void require_nonnegative(double v, int step, const char* name) {
    if (!(v >= 0.0))
        throw ConfigError("step " + std::to_string(step) + " gain " + name + " must be >= 0");
}

void require_positive_definite(const Eigen::MatrixXd& m, int step, const char* name) {
    if (m.size() == 0) return;  // sized only on estimator-bearing steps
    if (m.rows() != m.cols())
        throw ConfigError("step " + std::to_string(step) + " gain matrix " + name +
                          " must be square");
    if (!m.isApprox(m.transpose(), 1e-12))
        throw ConfigError("step " + std::to_string(step) + " gain matrix " + name +
                          " must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw ConfigError("step " + std::to_string(step) + " gain matrix " + name +
                          " must be positive definite");
}

}  // namespace

void OddRatio::validate() const {
    if (num <= 0 || den <= 0)
        throw ConfigError("m_c must be a ratio of positive odd integers");
    const double v = value();
    if (!(v > 0.5 && v < 1.0)) throw ConfigError("m_c must lie in (0.5, 1)");
    if (num % 2 == 0 || den % 2 == 0)
        throw ConfigError("m_c must be a ratio of positive odd integers");
}

void StepGains::validate(int step) const {
    require_positive(k, step, "k");
    require_nonnegative(r, step, "r");
    require_nonnegative(n, step, "n");
    require_positive(kappa, step, "kappa");
    require_positive(kappa_n, step, "kappa_n");
    require_positive(tau_sigma, step, "tau_sigma");
    require_positive(eps_sigma, step, "eps_sigma");
    require_nonnegative(gamma_s, step, "gamma_s");
    require_positive(gamma_decay, step, "gamma_decay");
    require_positive(gamma1, step, "gamma1");
    require_positive(gamma2, step, "gamma2");
    require_nonnegative(gamma3, step, "gamma3");
    require_positive(gamma_n1, step, "gamma_n1");
    require_positive(gamma_n2, step, "gamma_n2");
    require_nonnegative(gamma_n3, step, "gamma_n3");
    require_positive(upsilon1, step, "upsilon1");
    require_nonnegative(upsilon2, step, "upsilon2");
    if (step >= 2) {
        require_positive(a1, step, "a1");
        require_nonnegative(a2, step, "a2");
        require_positive(b1, step, "b1");
        require_nonnegative(b2, step, "b2");
        require_positive(eps_c, step, "eps_c");
        if (!(m_d > 0.0 && m_d < 1.0))
            throw ConfigError("step " + std::to_string(step) + " filter m_d must be in (0, 1)");
        const double lo = m_d / (2.0 - m_d);
        if (!(m_ic > lo && m_ic < 1.0))
            throw ConfigError("step " + std::to_string(step) +
                              " filter m_ic must lie in (m_d/(2-m_d), 1)");
    }
    require_positive_definite(gamma_omega, step, "gamma_omega");
    require_positive_definite(gamma_l, step, "gamma_l");
}

void ControllerGains::validate() const {
    m_c.validate();
    if (steps.empty()) throw ConfigError("controller needs gains for at least one step");
    for (size_t i = 0; i < steps.size(); ++i) steps[i].validate(static_cast<int>(i) + 1);
}

std::pair<double, double> command_filter_deriv(const FilterState& fs, double alpha_prev,
                                               const StepGains& g) {
    const double err = fs.eta_c - alpha_prev;
    const double scaled_d = g.eps_c * fs.eta_d;
    const double d_eta_d = (-g.a1 * err - g.a2 * sig_pow(err, g.m_ic) - g.b1 * scaled_d -
                            g.b2 * sig_pow(scaled_d, g.m_d)) /
                           (g.eps_c * g.eps_c);
    return {fs.eta_d, d_eta_d};
}

Eigen::VectorXd compensation_deriv(const Eigen::VectorXd& delta,
                                   const Eigen::VectorXd& g_vals,
                                   const Eigen::VectorXd& eta_c_next,
                                   const Eigen::VectorXd& alphas,
                                   const ControllerGains& gains) {
    const auto n = delta.size();
    if (n < 2) throw ConfigError("compensation_deriv: needs order >= 2");
    if (g_vals.size() != n || eta_c_next.size() != n - 1 || alphas.size() != n - 1 ||
        static_cast<Eigen::Index>(gains.steps.size()) != n)
        throw ConfigError("compensation_deriv: input sizes must match the plant order");
    const double m_c = gains.m_c.value();
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& g = gains.steps[i];
        d(i) = -g.k * delta(i) - g.r * sig_pow(delta(i), m_c);
        if (i + 1 < n) d(i) += g_vals(i) * (eta_c_next(i) - alphas(i)) + g_vals(i) * delta(i + 1);
        if (i > 0) d(i) -= g_vals(i - 1) * delta(i - 1);
    }
    return d;
}

double virtual_control(int step, double xi, double sigma, double w,
                       const EstimatorSignals* est, double mu_hat, double f_bar,
                       double feedforward, double g, double g_prev, double xi_prev,
                       const StepGains& gains, double m_c) {
    if (!(g > 0.0)) throw ConfigError("virtual_control: control gain G must be > 0");
    double bracket = -gains.k * xi + feedforward -
                     gains.n * psi(sigma, m_c, gains.tau_sigma, gains.eps_sigma) -
                     (1.0 - w) * mu_hat * f_bar * std::tanh(f_bar * sigma / gains.kappa);
    if (est != nullptr && w != 0.0) {
        const Eigen::VectorXd omega_grad = est->h_grad.transpose() * est->omega_hat;  // q
        const Eigen::VectorXd p_hat = est->l_hat.transpose() * est->rho;              // q
        const double neural = est->omega_hat.dot(est->h) +
                              0.5 * sigma * est->rho.squaredNorm() * omega_grad.squaredNorm() +
                              0.5 * sigma * (est->h_grad * p_hat).squaredNorm();
        bracket -= w * neural;
    }
    double alpha = bracket / g;
    if (step >= 2) alpha -= g_prev / g * xi_prev;
    return alpha;
}

AdaptiveDerivs adaptive_derivs(double sigma, double s_n, double w,
                               const EstimatorSignals& est, double mu_hat, double f_bar,
                               const StepGains& gains, double m_c) {
    const double drive = w * (sigma + gains.gamma_s * s_n);
    const Eigen::VectorXd p_hat = est.l_hat.transpose() * est.rho;
    AdaptiveDerivs out;
    out.d_omega = gains.gamma_omega *
                  (drive * (est.h - est.h_grad * p_hat) - gains.gamma_decay * est.omega_hat);
    out.d_l = gains.gamma_l *
              (drive * (est.rho * (est.h_grad.transpose() * est.omega_hat).transpose()) -
               gains.gamma_decay * est.l_hat);
    out.d_mu = gains.gamma1 * (1.0 - w) * f_bar * sigma * std::tanh(f_bar * sigma / gains.kappa) -
               gains.gamma2 * mu_hat - gains.gamma3 * sig_pow(mu_hat, m_c);
    return out;
}

double predictor_deriv(double eta, double eta_pred, double w, const EstimatorSignals& est,
                       double g, double eta_next, double mu_n_hat, double f_bar,
                       const StepGains& gains, double m_c) {
    const double s_n = eta - eta_pred;
    double neural = 0.0;
    if (w != 0.0) {
        const Eigen::VectorXd omega_grad = est.h_grad.transpose() * est.omega_hat;  // q
        const Eigen::VectorXd p_hat = est.l_hat.transpose() * est.rho;              // q
        neural = est.omega_hat.dot(est.h) +
                 0.5 * s_n * est.rho.squaredNorm() * omega_grad.squaredNorm() +
                 0.5 * s_n * (est.h_grad * p_hat).squaredNorm();
    }
    return w * neural + g * eta_next + gains.upsilon1 * s_n +
           gains.upsilon2 * sig_pow(s_n, m_c) +
           (1.0 - w) * mu_n_hat * f_bar * std::tanh(f_bar * s_n / gains.kappa_n);
}

double mu_n_deriv(double s_n, double w, double mu_n_hat, double f_bar,
                  const StepGains& gains, double m_c) {
    return gains.gamma_n1 * (1.0 - w) * s_n * f_bar * std::tanh(f_bar * s_n / gains.kappa_n) -
           gains.gamma_n2 * mu_n_hat - gains.gamma_n3 * sig_pow(mu_n_hat, m_c);
}

}  // namespace ffbs
