#include "ffbs/pipeline.hpp"

#include <cmath>
#include <string>

#include "ffbs/errors.hpp"

namespace ffbs {

namespace {

void ensure_finite(double v, const std::string& name, double t) {
    if (!std::isfinite(v)) throw NumericalError("non-finite " + name, t);
}

template <typename Derived>
void ensure_finite(const Eigen::DenseBase<Derived>& v, const std::string& name, double t) {
    if (!v.allFinite()) throw NumericalError("non-finite " + name, t);
}

std::string step_tag(const char* what, int step) {
    return std::string(what) + " at step " + std::to_string(step);
}

}  // namespace

StateLayout ControlStack::layout() const {
    StateLayout l;
    l.order = model.order();
    l.est.resize(l.order);
    for (int i = 0; i < l.order; ++i) {
        if (!estimators[i].has_value()) continue;
        const auto& e = *estimators[i];
        l.est[i] = {true, e.node_count(), e.fourier.term_count, e.param_dim};
    }
    return l;
}

void ControlStack::validate() const {
    model.validate();
    gains.validate();
    if (model.order() < 2) throw ConfigError("closed-loop control needs plant order >= 2");
    const auto n = static_cast<size_t>(model.order());
    if (gains.steps.size() != n) throw ConfigError("gains must cover every plant step");
    if (estimators.size() != n || param_regions.size() != n)
        throw ConfigError("estimator and region lists must cover every plant step");
    if (state_regions.size() != n)
        throw ConfigError("one switch region required per plant state");
    for (const auto& region : state_regions) region.validate();
    for (size_t i = 0; i < n; ++i) {
        const auto& step = model.steps[i];
        const int human = static_cast<int>(i) + 1;
        if (step.has_uncertainty != estimators[i].has_value())
            throw ConfigError("step " + std::to_string(human) +
                              ": estimator must be attached exactly when the step has an "
                              "uncertainty channel");
        if (!estimators[i]) {
            if (!param_regions[i].empty())
                throw ConfigError("step " + std::to_string(human) +
                                  ": parameter regions require an estimator");
            continue;
        }
        const auto& est = *estimators[i];
        est.validate();
        if (est.state_dim != human)
            throw ConfigError("step " + std::to_string(human) +
                              ": estimator state_dim must equal the step index");
        if (est.param_dim != step.param_dim)
            throw ConfigError("step " + std::to_string(human) +
                              ": estimator param_dim must match the uncertainty channel");
        if (param_regions[i].size() != static_cast<size_t>(est.param_dim))
            throw ConfigError("step " + std::to_string(human) +
                              ": one switch region required per estimated parameter");
        for (const auto& region : param_regions[i]) region.validate();
        const auto& g = gains.steps[i];
        if (g.gamma_omega.rows() != est.node_count())
            throw ConfigError("step " + std::to_string(human) +
                              ": gamma_omega must be node_count x node_count");
        if (g.gamma_l.rows() != est.fourier.term_count)
            throw ConfigError("step " + std::to_string(human) +
                              ": gamma_l must be term_count x term_count");
    }
}

PipelineResult control_pipeline(const ControlStack& stack, const AugmentedState& aug,
                                double t) {
    const int n = stack.model.order();
    const double m_c = stack.gains.m_c.value();
    const auto [y_d, y_d_dot] = reference_eval(stack.reference, t);

    PipelineResult res;
    res.errors.xi.resize(n);
    res.errors.s_n = Eigen::VectorXd::Zero(n);
    res.errors.delta = aug.delta;
    res.diag.resize(n);
    res.alphas.resize(n);
    res.deriv = zero_state(stack.layout());

    Eigen::VectorXd g_vals(n);
    Eigen::VectorXd f_bars(n);
    std::vector<EstimatorSignals> signals(n);

    for (int i = 0; i < n; ++i) {
        const auto bar = aug.eta.head(i + 1);
        g_vals(i) = stack.model.steps[i].G(bar);
        if (!(g_vals(i) > 0.0))
            throw NumericalError(step_tag("non-positive control gain G", i + 1), t);
        f_bars(i) = stack.model.steps[i].F_bound(bar);
        res.diag[i].f_true = stack.model.steps[i].F(bar, t);

        res.errors.xi(i) = aug.eta(i) - (i == 0 ? y_d : aug.filters[i - 1].eta_c);

        if (stack.estimators[i]) {
            const auto& est = *stack.estimators[i];
            auto& sig = signals[i];
            sig.rho = est.fourier.eval(t);
            sig.omega_hat = aug.adaptive[i].omega_hat;
            sig.l_hat = aug.adaptive[i].l_hat;
            const Eigen::VectorXd p_hat = sig.l_hat.transpose() * sig.rho;
            est.eval_with_grad(bar, p_hat, sig.h, sig.h_grad);
            res.diag[i].p_hat = p_hat;
            res.diag[i].w = switch_indicator(
                std::span<const double>(aug.eta.data(), i + 1),
                std::span<const double>(p_hat.data(), p_hat.size()),
                std::span<const SwitchRegion>(stack.state_regions.data(), i + 1),
                std::span<const SwitchRegion>(stack.param_regions[i].data(),
                                              stack.param_regions[i].size()));
            res.diag[i].omega_h = sig.omega_hat.dot(sig.h);
            res.errors.s_n(i) = aug.eta(i) - aug.adaptive[i].eta_pred;
        }
    }

    res.errors.sigma = res.errors.xi - res.errors.delta;

    for (int i = 0; i < n; ++i) {
        const bool has_est = stack.estimators[i].has_value();
        const double ff = i == 0 ? y_d_dot : aug.filters[i - 1].eta_d;
        const double mu_hat = has_est ? aug.adaptive[i].mu_hat : 0.0;
        res.alphas[i] = virtual_control(
            i + 1, res.errors.xi(i), res.errors.sigma(i), res.diag[i].w,
            has_est ? &signals[i] : nullptr, mu_hat, f_bars(i), ff, g_vals(i),
            i > 0 ? g_vals(i - 1) : 0.0, i > 0 ? res.errors.xi(i - 1) : 0.0,
            stack.gains.steps[i], m_c);
        ensure_finite(res.alphas[i], step_tag("virtual control alpha", i + 1), t);
    }
    res.u = res.alphas[n - 1];

    res.deriv.eta = plant_deriv(stack.model, aug.eta, res.u, t);
    ensure_finite(res.deriv.eta, "plant state derivative", t);

    for (int i = 1; i < n; ++i) {
        const auto [dc, dd] =
            command_filter_deriv(aug.filters[i - 1], res.alphas[i - 1], stack.gains.steps[i]);
        res.deriv.filters[i - 1] = {dc, dd};
        ensure_finite(dd, step_tag("command filter derivative", i + 1), t);
    }

    Eigen::VectorXd eta_c_next(n - 1), alpha_head(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        eta_c_next(i) = aug.filters[i].eta_c;
        alpha_head(i) = res.alphas[i];
    }
    res.deriv.delta =
        compensation_deriv(aug.delta, g_vals, eta_c_next, alpha_head, stack.gains);
    ensure_finite(res.deriv.delta, "compensation derivative", t);

    for (int i = 0; i < n; ++i) {
        if (!stack.estimators[i]) continue;
        const auto& g = stack.gains.steps[i];
        const auto& a = aug.adaptive[i];
        auto& d = res.deriv.adaptive[i];
        const auto ad = adaptive_derivs(res.errors.sigma(i), res.errors.s_n(i),
                                        res.diag[i].w, signals[i], a.mu_hat, f_bars(i), g,
                                        m_c);
        d.omega_hat = ad.d_omega;
        d.l_hat = ad.d_l;
        d.mu_hat = ad.d_mu;
        const double eta_next = i + 1 < n ? aug.eta(i + 1) : res.u;
        d.eta_pred = predictor_deriv(aug.eta(i), a.eta_pred, res.diag[i].w, signals[i],
                                     g_vals(i), eta_next, a.mu_n_hat, f_bars(i), g, m_c);
        d.mu_n_hat = mu_n_deriv(res.errors.s_n(i), res.diag[i].w, a.mu_n_hat, f_bars(i), g,
                                m_c);
        ensure_finite(d.omega_hat, step_tag("omega_hat derivative", i + 1), t);
        ensure_finite(d.l_hat, step_tag("l_hat derivative", i + 1), t);
        ensure_finite(d.mu_hat, step_tag("mu_hat derivative", i + 1), t);
        ensure_finite(d.mu_n_hat, step_tag("mu_n_hat derivative", i + 1), t);
        ensure_finite(d.eta_pred, step_tag("predictor derivative", i + 1), t);
    }

    return res;
}

}  // namespace ffbs
