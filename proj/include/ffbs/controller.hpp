#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace ffbs {

// Fractional exponent m_c kept as an exact odd/odd ratio so signed powers
// stay well defined.
struct OddRatio {
    int num = 3;
    int den = 5;

    double value() const { return static_cast<double>(num) / den; }
    void validate() const;  // both odd, value in (0.5, 1)
};

// Per-step tuning scalars. Gains that a baseline variant may legitimately
// disable (r, n, gamma_s, gamma3, gamma_n3, upsilon2, a2, b2) validate as
// >= 0; everything else must be strictly positive.
struct StepGains {
    double k = 1.0;
    double r = 1.0;
    double n = 0.5;
    double kappa = 0.1;
    double kappa_n = 0.1;
    double tau_sigma = 0.01;
    double eps_sigma = 0.01;

    double gamma_s = 0.0;       // prediction-error weight in the composite laws
    double gamma_decay = 0.001; // weight decay on omega_hat and l_hat
    double gamma1 = 15.0, gamma2 = 0.001, gamma3 = 0.001;        // mu_hat law
    double gamma_n1 = 15.0, gamma_n2 = 0.001, gamma_n3 = 0.001;  // mu_n_hat law
    double upsilon1 = 10.0, upsilon2 = 1.0;                      // predictor injection

    // Command filter (ignored for step 1, which filters nothing).
    double a1 = 4.0, a2 = 4.0, b1 = 4.0, b2 = 4.0;
    double eps_c = 0.05;
    double m_d = 0.6;
    double m_ic = 0.7;  // must lie in (m_d/(2-m_d), 1)

    // Adaptation gain matrices, sized to the step's estimator when present.
    Eigen::MatrixXd gamma_omega;  // node_count x node_count, positive definite
    Eigen::MatrixXd gamma_l;      // term_count x term_count, positive definite

    void validate(int step) const;  // scalar constraints; step is 1-based for messages
};

struct ControllerGains {
    OddRatio m_c;
    std::vector<StepGains> steps;

    void validate() const;
};

// Rapid finite-time command filter state for one step.
struct FilterState {
    double eta_c = 0.0;
    double eta_d = 0.0;
};

// Adjustable estimator state for one uncertainty-bearing step.
struct AdaptiveState {
    Eigen::VectorXd omega_hat;  // node_count
    Eigen::MatrixXd l_hat;      // term_count x param_dim
    double mu_hat = 0.0;
    double mu_n_hat = 0.0;
    double eta_pred = 0.0;
};

struct LoopErrors {
    Eigen::VectorXd xi;
    Eigen::VectorXd delta;
    Eigen::VectorXd sigma;  // xi - delta
    Eigen::VectorXd s_n;    // eta - eta_pred, zero on steps without an estimator
};

// Estimator quantities shared by the control, adaptation and predictor laws,
// all evaluated at the same (state, p_hat, t).
struct EstimatorSignals {
    Eigen::VectorXd h;          // Gaussian outputs
    Eigen::MatrixXd h_grad;     // node_count x param_dim
    Eigen::VectorXd rho;        // Fourier basis at t
    Eigen::VectorXd omega_hat;
    Eigen::MatrixXd l_hat;
};

struct AdaptiveDerivs {
    Eigen::VectorXd d_omega;
    Eigen::MatrixXd d_l;
    double d_mu = 0.0;
};

// d/dt of (eta_c, eta_d) for the filter tracking alpha_prev.
std::pair<double, double> command_filter_deriv(const FilterState& fs, double alpha_prev,
                                               const StepGains& g);

// d/dt of the filtering-error compensation states. eta_c_next and alphas hold
// the n-1 pairs (eta_{i+1,c}, alpha_i); g_vals holds G_1..G_n evaluated at the
// current state.
Eigen::VectorXd compensation_deriv(const Eigen::VectorXd& delta,
                                   const Eigen::VectorXd& g_vals,
                                   const Eigen::VectorXd& eta_c_next,
                                   const Eigen::VectorXd& alphas,
                                   const ControllerGains& gains);

// Virtual control alpha_i (the actual input u when step == n). est may be
// null for steps without an uncertainty channel (then w must be 1).
// feedforward is y_d_dot for step 1 and the filter derivative state eta_d
// for later steps; g_prev/xi_prev are ignored when step == 1.
double virtual_control(int step, double xi, double sigma, double w,
                       const EstimatorSignals* est, double mu_hat, double f_bar,
                       double feedforward, double g, double g_prev, double xi_prev,
                       const StepGains& gains, double m_c);

// Composite adaptation: d/dt of omega_hat, l_hat and mu_hat.
AdaptiveDerivs adaptive_derivs(double sigma, double s_n, double w,
                               const EstimatorSignals& est, double mu_hat, double f_bar,
                               const StepGains& gains, double m_c);

// Serial-parallel predictor: d/dt of eta_pred. eta_next is eta_{i+1}, or u
// for the last step.
double predictor_deriv(double eta, double eta_pred, double w, const EstimatorSignals& est,
                       double g, double eta_next, double mu_n_hat, double f_bar,
                       const StepGains& gains, double m_c);

double mu_n_deriv(double s_n, double w, double mu_n_hat, double f_bar,
                  const StepGains& gains, double m_c);

}  // namespace ffbs
