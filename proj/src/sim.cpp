#include "ffbs/sim.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ffbs {

Variant parse_variant(const std::string& tag) {
    if (tag == "developed") return Variant::developed;
    if (tag == "developed-without-composite") return Variant::developed_without_composite;
    if (tag == "fse-rbfnn-cfb") return Variant::fse_rbfnn_cfb;
    throw ConfigError("unknown variant tag: " + tag +
                      " (expected developed, developed-without-composite or fse-rbfnn-cfb)");
}

std::string variant_tag(Variant v) {
    switch (v) {
        case Variant::developed: return "developed";
        case Variant::developed_without_composite: return "developed-without-composite";
        case Variant::fse_rbfnn_cfb: return "fse-rbfnn-cfb";
    }
    return "developed";
}

ControllerGains apply_variant(ControllerGains gains, Variant v) {
    if (v == Variant::developed) return gains;
    for (auto& g : gains.steps) {
        g.gamma_s = 0.0;
        if (v == Variant::fse_rbfnn_cfb) {
            g.n = 0.0;
            g.r = 0.0;
            g.gamma3 = 0.0;
            g.gamma_n3 = 0.0;
            g.upsilon2 = 0.0;
            g.a2 = 0.0;
            g.b2 = 0.0;
        }
    }
    return gains;
}

void SimOptions::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(t_final >= 10.0 * dt)) throw ConfigError("t_final must be at least 10*dt");
    if (log_stride < 1) throw ConfigError("log_stride must be >= 1");
    if (!(divergence_limit > 0.0)) throw ConfigError("divergence_limit must be > 0");
}

Eigen::VectorXd rk4_step(const Eigen::VectorXd& x, double t, double dt,
                         const FlatDynamics& dynamics) {
    if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be > 0");
    const auto stage = [&](const Eigen::VectorXd& xs, double ts, int idx) {
        Eigen::VectorXd k = dynamics(xs, ts);
        if (!k.allFinite())
            throw NumericalError("non-finite derivative in rk4 stage " + std::to_string(idx),
                                 ts);
        return k;
    };
    const Eigen::VectorXd k1 = stage(x, t, 1);
    const Eigen::VectorXd k2 = stage(x + 0.5 * dt * k1, t + 0.5 * dt, 2);
    const Eigen::VectorXd k3 = stage(x + 0.5 * dt * k2, t + 0.5 * dt, 3);
    const Eigen::VectorXd k4 = stage(x + dt * k3, t + dt, 4);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

Trace make_trace(const ControlStack& stack) {
    Trace tr;
    tr.order = stack.model.order();
    tr.eta.resize(tr.order);
    tr.delta.resize(tr.order);
    for (int i = 0; i < tr.order; ++i) {
        if (!stack.estimators[i]) continue;
        tr.est_steps.push_back(i + 1);
        tr.p_hat.emplace_back(stack.estimators[i]->param_dim);
    }
    tr.w.resize(tr.est_steps.size());
    tr.approx_error.resize(tr.est_steps.size());
    tr.s_n.resize(tr.est_steps.size());
    tr.omega_norm.resize(tr.est_steps.size());
    return tr;
}

void log_sample(Trace& tr, const ControlStack& stack, const AugmentedState& state,
                const PipelineResult& pr, double t) {
    tr.t.push_back(t);
    for (int i = 0; i < tr.order; ++i) {
        tr.eta[i].push_back(state.eta(i));
        tr.delta[i].push_back(state.delta(i));
    }
    tr.y_d.push_back(stack.reference.y_d(t));
    tr.xi1.push_back(pr.errors.xi(0));
    tr.u.push_back(pr.u);
    for (size_t e = 0; e < tr.est_steps.size(); ++e) {
        const int i = tr.est_steps[e] - 1;
        const auto& d = pr.diag[i];
        tr.w[e].push_back(d.w);
        for (Eigen::Index j = 0; j < d.p_hat.size(); ++j)
            tr.p_hat[e][j].push_back(d.p_hat(j));
        tr.approx_error[e].push_back(d.f_true - d.w * d.omega_h);
        tr.s_n[e].push_back(pr.errors.s_n(i));
        tr.omega_norm[e].push_back(state.adaptive[i].omega_hat.norm());
    }
}

}  // namespace

Trace run_closed_loop(const ControlStack& stack, const SimOptions& opts) {
    opts.validate();
    ControlStack live = stack;
    live.gains = apply_variant(stack.gains, opts.variant);
    if (opts.eta0_override) live.eta0 = *opts.eta0_override;
    live.validate();

    const StateLayout layout = live.layout();
    const int n = layout.order;
    if (live.eta0.size() != n)
        throw ConfigError("initial state length must equal the plant order");

    AugmentedState state = zero_state(layout);
    state.eta = live.eta0;
    for (int i = 0; i < n; ++i)
        if (layout.est[i].present) state.adaptive[i].eta_pred = state.eta(i);

    // Seed each filter on its virtual control so xi_i starts at the filter
    // tracking error rather than an arbitrary offset.
    const PipelineResult seed = control_pipeline(live, state, 0.0);
    for (int i = 1; i < n; ++i) state.filters[i - 1].eta_c = seed.alphas[i - 1];

    const auto dynamics = [&](const Eigen::VectorXd& x, double t) {
        return control_pipeline(live, AugmentedState::unflatten(layout, x), t)
            .deriv.flatten(layout);
    };

    Trace tr = make_trace(live);
    const auto total = static_cast<long>(std::llround(opts.t_final / opts.dt));
    if (total < 1) throw ConfigError("t_final must cover at least one step of size dt");

    Eigen::VectorXd x = state.flatten(layout);
    for (long k = 0;; ++k) {
        const double t = k * opts.dt;
        try {
            if (k % opts.log_stride == 0 || k == total)
                log_sample(tr, live, state, control_pipeline(live, state, t), t);
            if (k == total) break;
            x = rk4_step(x, t, opts.dt, dynamics);
        } catch (const NumericalError& e) {
            throw DivergenceError(e.what(), e.t_abort, std::move(tr));
        }
        if (x.cwiseAbs().maxCoeff() > opts.divergence_limit)
            throw DivergenceError("state magnitude exceeded divergence limit", t + opts.dt,
                                  std::move(tr));
        state = AugmentedState::unflatten(layout, x);
    }
    return tr;
}

RunMetrics metrics(const Trace& trace, double t_lo, double t_hi, double settle_threshold) {
    if (trace.samples() == 0) throw ConfigError("metrics: empty trace");
    if (!(t_lo <= t_hi)) throw ConfigError("metrics: window needs t_lo <= t_hi");

    size_t lo = trace.samples(), hi = 0;
    for (size_t s = 0; s < trace.samples(); ++s) {
        if (trace.t[s] >= t_lo && trace.t[s] <= t_hi) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    if (lo > hi) throw ConfigError("metrics: window contains no samples");

    RunMetrics m;
    const auto count = static_cast<double>(hi - lo + 1);
    double acc_xi = 0.0, acc_ef = 0.0, duty = 0.0;
    long ef_count = 0;
    for (size_t s = lo; s <= hi; ++s) {
        acc_xi += trace.xi1[s] * trace.xi1[s];
        for (int i = 0; i < trace.order; ++i)
            m.max_abs_state = std::max(m.max_abs_state, std::abs(trace.eta[i][s]));
        double w_min = 1.0;
        for (size_t e = 0; e < trace.est_steps.size(); ++e) {
            acc_ef += trace.approx_error[e][s] * trace.approx_error[e][s];
            ++ef_count;
            w_min = std::min(w_min, trace.w[e][s]);
        }
        if (w_min == 1.0) duty += 1.0;
    }
    m.rms_tracking = std::sqrt(acc_xi / count);
    m.rms_approx_error = ef_count > 0 ? std::sqrt(acc_ef / static_cast<double>(ef_count)) : 0.0;
    m.switch_duty = duty / count;

    size_t last_violation = trace.samples();  // sentinel: none
    for (size_t s = trace.samples(); s-- > 0;) {
        if (std::abs(trace.xi1[s]) >= settle_threshold) {
            last_violation = s;
            break;
        }
    }
    if (last_violation == trace.samples())
        m.settle_time = 0.0;
    else if (last_violation + 1 == trace.samples())
        m.settle_time = std::numeric_limits<double>::infinity();
    else
        m.settle_time = trace.t[last_violation + 1];
    return m;
}

std::vector<VariantResult> compare_variants(const ControlStack& stack,
                                            const SimOptions& base,
                                            const std::vector<Variant>& variants,
                                            double window_lo, double window_hi) {
    if (variants.size() < 2)
        throw ConfigError("compare needs at least two variants");
    std::vector<VariantResult> rows;
    rows.reserve(variants.size());
    for (const Variant v : variants) {
        VariantResult row;
        row.tag = variant_tag(v);
        SimOptions opts = base;
        opts.variant = v;
        try {
            row.trace = run_closed_loop(stack, opts);
            row.metrics = metrics(row.trace, window_lo, window_hi);
            row.ok = true;
        } catch (const NumericalError& e) {
            row.error = e.what() + std::string(" (t=") + std::to_string(e.t_abort) + ")";
        } catch (const ConfigError& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ffbs
