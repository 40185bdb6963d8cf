#pragma once

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace ffbs {

// Signed fractional power sig(x)^m = |x|^m * sgn(x). Odd and monotone
// increasing in x; total (no domain errors).
double sig_pow(double x, double m);

// Truncated Fourier basis
//   rho(t) = [1, sqrt(2) sin(2*pi*t/T), sqrt(2) cos(2*pi*t/T),
//                sqrt(2) sin(4*pi*t/T), sqrt(2) cos(4*pi*t/T), ...]
// of odd length term_count. Models periodic time-varying parameters as
// p(t) ~ l^T rho(t).
struct FourierBasis {
    int term_count = 1;   // odd, >= 1
    double period = 1.0;  // seconds, > 0

    void validate() const;
    Eigen::VectorXd eval(double t) const;
};

inline Eigen::VectorXd fse_basis(double t, const FourierBasis& basis) { return basis.eval(t); }

// p_hat = l_hat^T rho with l_hat of shape (term_count x param_dim).
Eigen::VectorXd fse_eval(const Eigen::MatrixXd& l_hat, const Eigen::VectorXd& rho);

// Gaussian RBF network whose input is [state; p_hat]: the plant-state prefix
// followed by the Fourier-reconstructed periodic parameters. Kernel is
// exp(-||x - c_j||^2 / w_j^2), so outputs lie in (0, 1].
struct FseRbfEstimator {
    Eigen::MatrixXd centers;  // node_count x (state_dim + param_dim)
    Eigen::VectorXd widths;   // node_count, all > 0
    FourierBasis fourier;
    int state_dim = 0;
    int param_dim = 0;

    int node_count() const { return static_cast<int>(centers.rows()); }
    void validate() const;

    // Gaussian outputs H_hat at input [state; p_hat].
    Eigen::VectorXd eval(const Eigen::VectorXd& state, const Eigen::VectorXd& p_hat) const;

    // Analytic Jacobian of the outputs with respect to the p_hat block,
    // shape node_count x param_dim. Row j is dH_j/dp at the given input.
    Eigen::MatrixXd grad_p(const Eigen::VectorXd& state, const Eigen::VectorXd& p_hat) const;

    // Both of the above sharing the distance computation.
    void eval_with_grad(const Eigen::VectorXd& state, const Eigen::VectorXd& p_hat,
                        Eigen::VectorXd& h, Eigen::MatrixXd& h_grad) const;
};

inline Eigen::VectorXd rbf_eval(const FseRbfEstimator& est, const Eigen::VectorXd& state,
                                const Eigen::VectorXd& p_hat) {
    return est.eval(state, p_hat);
}

inline Eigen::MatrixXd rbf_grad_p(const FseRbfEstimator& est, const Eigen::VectorXd& state,
                                  const Eigen::VectorXd& p_hat) {
    return est.grad_p(state, p_hat);
}

// Scalar validity region of the approximator along one input axis.
struct SwitchRegion {
    double inner_bound = 1.0;  // c1 > 0
    double outer_bound = 2.0;  // c2 > c1
    int smooth_order = 2;      // n >= 1

    void validate() const;
};

// Smooth bump: 1 on [-c1, c1], 0 outside (-c2, c2), and
// cos^n((pi/2) sin^n((pi/2)(x^2 - c1^2)/(c2^2 - c1^2))) in between.
// Even in x; the first derivatives vanish at the junctions.
double smooth_switch(double x, const SwitchRegion& region);

// Product of smooth_switch over every state component and every estimated
// periodic-parameter component: 1 when all approximator inputs are inside
// the valid region, 0 when any is fully outside.
double switch_indicator(std::span<const double> states, std::span<const double> p_hat,
                        std::span<const SwitchRegion> state_regions,
                        std::span<const SwitchRegion> param_regions);

// Finite-time shaping function
//   psi(sigma) = sig(sigma)^(1+2mc) * sqrt((s + tau^2 + eps^2) /
//                ((s + tau^2)(s + eps^2))),  s = |sigma|^(2+2mc).
// Odd, finite for every sigma (including 0 and values whose powers would
// overflow in the naive form).
double psi(double sigma, double m_c, double tau, double eps);

// |sigma| - sigma*tanh(sigma/kappa), guaranteed in [0, 0.2785*kappa].
double lemma2_tanh_gap(double sigma, double kappa);

// |sigma| - sigma^2 * sqrt((sigma^2+tau^2+eps^2)/((sigma^2+tau^2)(sigma^2+eps^2))),
// guaranteed in [0, tau*eps/sqrt(tau^2+eps^2)).
double lemma2_radical_gap(double sigma, double tau, double eps);

// (sum |z_c|)^beta <= sum |z_c|^beta <= M^(1-beta) (sum |z_c|)^beta
// for 0 < beta <= 1, checked with absolute slack.
bool lemma3_power_sum_check(const Eigen::VectorXd& z, double beta, double slack = 1e-12);

// chi_tilde * (chi - chi_tilde)^mc <= -beta1 |chi_tilde|^(1+mc) + beta2 |chi|^(1+mc)
// with mc = m_c2/m_c1 in (0,1), both odd. Fractional powers follow the
// odd-ratio convention: exponent mc (odd/odd) is signed, exponent 1+mc
// (even/odd) is nonnegative.
bool lemma4_check(double chi_tilde, double chi, int m_c1, int m_c2, double slack = 1e-12);
std::pair<double, double> lemma4_betas(double m_c);

// Settling-time bound of a practically fast finite-time stable system with
// decay rates v1 (linear) and v2 (fractional, exponent m), split parameter
// nu in (0,1), from initial Lyapunov value V0.
double settling_time_bound(double v1, double v2, double m, double nu, double V0);

// Bound on the residual Lyapunov level set: min of the linear and the
// fractional branch estimates.
double residual_bound(double v1, double v2, double v3, double m, double nu);

// Tensor-product grid of evenly spaced points (endpoints included) with
// per_dim values per axis; returns per_dim^dims rows, last axis fastest.
Eigen::MatrixXd grid_centers(const std::vector<std::pair<double, double>>& ranges,
                             int per_dim);

}  // namespace ffbs
