#include "ffbs/verify.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "ffbs/mathkit.hpp"

namespace ffbs {

namespace {

constexpr std::uint64_t kSeed = 0x0ddba11c0ffeeULL;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Sampler {
    std::mt19937_64 rng{kSeed};

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    }
};

SuiteResult lemma1_calculators(long samples, double slack) {
    SuiteResult res{"lemma1-calculators", true, 0, ""};
    const double tol = std::max(slack, 0.0);

    const double settle = settling_time_bound(1.0, 1.0, 0.8, 0.5, 1.0);
    const double settle_ref = 5.0 * std::log(3.0);
    res.samples++;
    if (std::abs(settle - settle_ref) > tol) {
        res.passed = false;
        res.counterexample = "settling_time_bound(1,1,0.8,0.5,1) = " + fmt(settle) +
                             ", expected 5*ln(3) = " + fmt(settle_ref);
        return res;
    }
    const double resid = residual_bound(1.0, 1.0, 1.0, 0.5, 0.5);
    res.samples++;
    if (std::abs(resid - 2.0) > tol) {
        res.passed = false;
        res.counterexample = "residual_bound(1,1,1,0.5,0.5) = " + fmt(resid) + ", expected 2";
        return res;
    }

    Sampler s;
    const long rounds = std::min(samples, 2000L);
    for (long i = 0; i < rounds; ++i) {
        const double v1 = s.log_uniform(0.1, 10.0);
        const double v2 = s.log_uniform(0.1, 10.0);
        const double m = s.uniform(0.1, 0.95);
        const double nu = s.uniform(0.05, 0.95);
        double va = s.log_uniform(1e-3, 100.0);
        double vb = s.log_uniform(1e-3, 100.0);
        if (va > vb) std::swap(va, vb);
        res.samples++;
        const double ta = settling_time_bound(v1, v2, m, nu, va);
        const double tb = settling_time_bound(v1, v2, m, nu, vb);
        if (ta > tb + tol) {
            res.passed = false;
            res.counterexample = "settling_time_bound not monotone in V0: v1=" + fmt(v1) +
                                 " v2=" + fmt(v2) + " m=" + fmt(m) + " nu=" + fmt(nu) +
                                 " V0=" + fmt(va) + "->" + fmt(ta) + " vs V0=" + fmt(vb) +
                                 "->" + fmt(tb);
            return res;
        }
        // With v1=v2=1, m=1/2, nu=1/2 the linear branch is active for v3 >= 1/2.
        const double v3 = s.uniform(0.5, 5.0);
        res.samples++;
        const double r = residual_bound(1.0, 1.0, v3, 0.5, 0.5);
        if (std::abs(r - 2.0 * v3) > tol * std::max(1.0, 2.0 * v3)) {
            res.passed = false;
            res.counterexample = "residual_bound(1,1,v3,0.5,0.5) not linear: v3=" + fmt(v3) +
                                 " -> " + fmt(r) + ", expected " + fmt(2.0 * v3);
            return res;
        }
    }
    return res;
}

SuiteResult tanh_gap(long samples, double slack) {
    SuiteResult res{"lemma2-tanh-gap", true, 0, ""};
    Sampler s;
    for (long i = 0; i < samples; ++i) {
        const double sigma = s.uniform(-10.0, 10.0);
        const double kappa = s.log_uniform(1e-3, 10.0);
        res.samples++;
        const double gap = lemma2_tanh_gap(sigma, kappa);
        if (gap < -slack || gap > 0.2785 * kappa + slack) {
            res.passed = false;
            res.counterexample =
                "sigma=" + fmt(sigma) + " kappa=" + fmt(kappa) + " gap=" + fmt(gap) +
                " bound=" + fmt(0.2785 * kappa);
            return res;
        }
    }
    return res;
}

SuiteResult radical_gap(long samples, double slack) {
    SuiteResult res{"lemma2-radical-gap", true, 0, ""};
    Sampler s;
    for (long i = 0; i < samples; ++i) {
        const double sigma = s.uniform(-10.0, 10.0);
        const double tau = s.log_uniform(1e-3, 1.0);
        const double eps = s.log_uniform(1e-3, 1.0);
        res.samples++;
        const double gap = lemma2_radical_gap(sigma, tau, eps);
        const double bound = tau * eps / std::sqrt(tau * tau + eps * eps);
        if (gap < -slack || gap >= bound + slack) {
            res.passed = false;
            res.counterexample = "sigma=" + fmt(sigma) + " tau=" + fmt(tau) +
                                 " eps=" + fmt(eps) + " gap=" + fmt(gap) +
                                 " bound=" + fmt(bound);
            return res;
        }
    }
    return res;
}

SuiteResult psi_lower_bound(long samples, double slack) {
    SuiteResult res{"psi-lower-bound", true, 0, ""};
    constexpr double kRatios[] = {3.0 / 5.0, 5.0 / 7.0, 7.0 / 9.0};
    Sampler s;
    for (long i = 0; i < samples; ++i) {
        const double sigma = s.uniform(-10.0, 10.0);
        const double m_c = kRatios[s.uniform_int(0, 2)];
        const double tau = s.log_uniform(1e-3, 1.0);
        const double eps = s.log_uniform(1e-3, 1.0);
        res.samples++;
        const double v = psi(sigma, m_c, tau, eps);
        const double odd_gap = std::abs(v + psi(-sigma, m_c, tau, eps));
        const double lower = std::pow(std::abs(sigma), 1.0 + m_c) -
                             tau * eps / std::sqrt(tau * tau + eps * eps);
        if (!std::isfinite(v) || odd_gap > slack || sigma * v < lower - slack) {
            res.passed = false;
            res.counterexample = "sigma=" + fmt(sigma) + " m_c=" + fmt(m_c) +
                                 " tau=" + fmt(tau) + " eps=" + fmt(eps) +
                                 " sigma*psi=" + fmt(sigma * v) + " lower=" + fmt(lower) +
                                 " odd_gap=" + fmt(odd_gap);
            return res;
        }
    }
    // Factored evaluation stays finite where the naive radicand overflows.
    for (const double sigma : {1e160, -1e160, 1e300}) {
        res.samples++;
        const double v = psi(sigma, 0.6, 0.01, 0.01);
        if (!std::isfinite(v) || !(sigma * v > 0.0)) {
            res.passed = false;
            res.counterexample = "sigma=" + fmt(sigma) + " psi=" + fmt(v);
            return res;
        }
    }
    return res;
}

SuiteResult power_sum(long samples, double slack) {
    SuiteResult res{"lemma3-power-sum", true, 0, ""};
    Sampler s;
    for (long i = 0; i < samples; ++i) {
        const int m = s.uniform_int(1, 8);
        Eigen::VectorXd z(m);
        for (int c = 0; c < m; ++c) z(c) = s.uniform(-5.0, 5.0);
        const double beta = (i % 16 == 0) ? 1.0 : s.uniform(1e-3, 1.0);
        res.samples++;
        if (!lemma3_power_sum_check(z, beta, slack)) {
            std::ostringstream z_text;
            for (int c = 0; c < m; ++c) z_text << (c ? " " : "") << fmt(z(c));
            res.passed = false;
            res.counterexample = "beta=" + fmt(beta) + " z=[" + z_text.str() + "]";
            return res;
        }
    }
    return res;
}

SuiteResult odd_ratio(long samples, double slack) {
    SuiteResult res{"lemma4-odd-ratio", true, 0, ""};
    constexpr int kPairs[][2] = {{5, 3}, {7, 5}, {9, 7}};
    Sampler s;
    for (long i = 0; i < samples; ++i) {
        const auto& pair = kPairs[s.uniform_int(0, 2)];
        const double chi_tilde = s.uniform(-5.0, 5.0);
        const double chi = s.uniform(-5.0, 5.0);
        res.samples++;
        if (!lemma4_check(chi_tilde, chi, pair[0], pair[1], slack)) {
            res.passed = false;
            res.counterexample = "chi_tilde=" + fmt(chi_tilde) + " chi=" + fmt(chi) +
                                 " m_c=" + std::to_string(pair[1]) + "/" +
                                 std::to_string(pair[0]);
            return res;
        }
    }
    return res;
}

SuiteResult gradient_fd(double grad_tol) {
    SuiteResult res{"rbf-gradient-fd", true, 0, ""};
    FseRbfEstimator est;
    est.state_dim = 2;
    est.param_dim = 1;
    est.centers = grid_centers({{-1.5, 1.5}, {-1.5, 1.5}, {-3.0, 3.0}}, 6);
    est.widths = Eigen::VectorXd::Constant(est.centers.rows(), 2.0);
    est.fourier.term_count = 7;
    est.fourier.period = std::numbers::pi;
    est.validate();

    constexpr double h = 1e-5;
    Sampler s;
    for (long i = 0; i < 1000; ++i) {
        Eigen::VectorXd state(2);
        state << s.uniform(-1.5, 1.5), s.uniform(-1.5, 1.5);
        Eigen::VectorXd p(1);
        p << s.uniform(-3.0, 3.0);
        res.samples++;

        const Eigen::MatrixXd analytic = est.grad_p(state, p);
        Eigen::VectorXd pp = p, pm = p;
        pp(0) += h;
        pm(0) -= h;
        const Eigen::MatrixXd fd = (est.eval(state, pp) - est.eval(state, pm)) / (2.0 * h);
        const double num = (analytic - fd).cwiseAbs().maxCoeff();
        const double den = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
        if (num / den > grad_tol) {
            res.passed = false;
            res.counterexample = "state=(" + fmt(state(0)) + ", " + fmt(state(1)) +
                                 ") p=" + fmt(p(0)) + " rel_err=" + fmt(num / den);
            return res;
        }
    }
    return res;
}

}  // namespace

std::vector<SuiteResult> run_verification(long samples, double slack, double grad_tol) {
    std::vector<SuiteResult> out;
    out.push_back(lemma1_calculators(samples, slack));
    out.push_back(tanh_gap(samples, slack));
    out.push_back(radical_gap(samples, slack));
    out.push_back(psi_lower_bound(samples, slack));
    out.push_back(power_sum(samples, slack));
    out.push_back(odd_ratio(samples, slack));
    out.push_back(gradient_fd(grad_tol));
    return out;
}

}  // namespace ffbs
