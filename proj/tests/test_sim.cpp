#include "ffbs/sim.hpp"

#include "ffbs/config.hpp"
#include "ffbs/errors.hpp"
#include "ffbs/state.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace {

constexpr double kPi = std::numbers::pi;

// Known second-order chain (F = 0, G = 1) with no uncertainty channel:
// the controller has nothing to learn and pure stabilization must drive
// the tracking error to zero.
ffbs::ControlStack chain_stack() {
    ffbs::ControlStack stack;
    stack.model.name = "chain";
    stack.model.g_lower = 0.5;
    stack.model.g_upper = 2.0;
    for (int i = 0; i < 2; ++i) {
        ffbs::PlantStep s;
        s.F = [](const Eigen::VectorXd&, double) { return 0.0; };
        s.G = [](const Eigen::VectorXd&) { return 1.0; };
        s.F_bound = [](const Eigen::VectorXd&) { return 1.0; };
        stack.model.steps.push_back(s);
    }
    stack.reference.y_d = [](double t) { return std::sin(t); };
    stack.reference.y_d_dot = [](double t) { return std::cos(t); };
    stack.gains.m_c = {3, 5};
    stack.gains.steps.resize(2);
    stack.gains.steps[0].k = 8.0;
    stack.gains.steps[1].k = 5.0;
    stack.estimators = {std::nullopt, std::nullopt};
    stack.state_regions = {{1.5, 2.25, 2}, {1.5, 2.25, 2}};
    stack.param_regions = {{}, {}};
    stack.eta0 = Eigen::VectorXd::Zero(2);
    stack.eta0[0] = 0.5;
    return stack;
}

ffbs::Trace flat_trace(const std::vector<double>& xi1, double dt = 1.0) {
    ffbs::Trace tr;
    tr.order = 1;
    tr.xi1 = xi1;
    for (size_t s = 0; s < xi1.size(); ++s) {
        tr.t.push_back(dt * static_cast<double>(s));
        tr.y_d.push_back(0.0);
        tr.u.push_back(0.0);
    }
    tr.eta.resize(1);
    tr.eta[0] = xi1;
    tr.delta.resize(1);
    tr.delta[0].assign(xi1.size(), 0.0);
    return tr;
}

}  // namespace

TEST_CASE("rk4 closed-form oracles") {
    const ffbs::FlatDynamics zero = [](const Eigen::VectorXd& x, double) {
        return Eigen::VectorXd::Zero(x.size()).eval();
    };
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 1.7);
    CHECK((ffbs::rk4_step(x0, 0.0, 0.5, zero) - x0).cwiseAbs().maxCoeff() == 0.0);

    const ffbs::FlatDynamics growth = [](const Eigen::VectorXd& x, double) {
        return x.eval();
    };
    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    const double step = ffbs::rk4_step(one, 0.0, 0.1, growth)[0];
    CHECK(step == doctest::Approx(1.1051708).epsilon(1e-7));
    CHECK(std::abs(step - std::exp(0.1)) < 1e-6);

    const ffbs::FlatDynamics decay = [](const Eigen::VectorXd& x, double) {
        return (-x).eval();
    };
    Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    for (int k = 0; k < 1000; ++k) x = ffbs::rk4_step(x, k * 1e-3, 1e-3, decay);
    CHECK(std::abs(x[0] - std::exp(-1.0)) < 1e-10);
}

TEST_CASE("rk4 reports the failing stage") {
    const ffbs::FlatDynamics bad = [](const Eigen::VectorXd& x, double t) {
        Eigen::VectorXd d = x;
        d[0] = t > 0.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
        return d;
    };
    try {
        (void)ffbs::rk4_step(Eigen::VectorXd::Zero(1), 0.0, 0.1, bad);
        CHECK(false);
    } catch (const ffbs::NumericalError& e) {
        CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
    }

    CHECK_THROWS_AS(
        (void)ffbs::rk4_step(Eigen::VectorXd::Zero(1), 0.0, 0.0,
                             [](const Eigen::VectorXd& x, double) { return x.eval(); }),
        ffbs::ConfigError);
}

TEST_CASE("augmented state round-trips through the flat layout") {
    const auto built = ffbs::build_scenario(ffbs::default_config());
    const auto layout = built.stack.layout();

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd flat =
            Eigen::VectorXd::NullaryExpr(layout.flat_size(), [&] { return u(rng); });
        const auto state = ffbs::AugmentedState::unflatten(layout, flat);
        CHECK((state.flatten(layout) - flat).cwiseAbs().maxCoeff() == 0.0);
    }

    const auto zero = ffbs::zero_state(layout);
    CHECK(zero.eta.size() == 2);
    CHECK(zero.filters.size() == 1);
    CHECK(zero.adaptive.size() == 2);
    CHECK(zero.adaptive[1].omega_hat.size() == 216);
    CHECK(zero.adaptive[1].l_hat.rows() == 7);
    CHECK(zero.flatten(layout).isZero(0.0));
}

TEST_CASE("variant tags") {
    for (auto v : {ffbs::Variant::developed, ffbs::Variant::developed_without_composite,
                   ffbs::Variant::fse_rbfnn_cfb})
        CHECK(ffbs::parse_variant(ffbs::variant_tag(v)) == v);
    CHECK_THROWS_AS((void)ffbs::parse_variant("newfangled"), ffbs::ConfigError);
}

TEST_CASE("variants are gain ablations") {
    ffbs::ControllerGains base;
    base.m_c = {3, 5};
    base.steps.resize(2);
    for (auto& g : base.steps) g.gamma_s = 5.0;

    const auto dev = ffbs::apply_variant(base, ffbs::Variant::developed);
    CHECK(dev.steps[1].gamma_s == 5.0);

    const auto nc = ffbs::apply_variant(base, ffbs::Variant::developed_without_composite);
    CHECK(nc.steps[0].gamma_s == 0.0);
    CHECK(nc.steps[1].gamma_s == 0.0);
    CHECK(nc.steps[1].n == base.steps[1].n);

    const auto cfb = ffbs::apply_variant(base, ffbs::Variant::fse_rbfnn_cfb);
    CHECK(cfb.steps[1].gamma_s == 0.0);
    CHECK(cfb.steps[1].n == 0.0);
    CHECK(cfb.steps[1].r == 0.0);
    CHECK(cfb.steps[1].gamma3 == 0.0);
    CHECK(cfb.steps[1].gamma_n3 == 0.0);
    CHECK(cfb.steps[1].upsilon2 == 0.0);
    CHECK(cfb.steps[1].a2 == 0.0);
    CHECK(cfb.steps[1].b2 == 0.0);
    CHECK(cfb.steps[1].k == base.steps[1].k);
    CHECK(cfb.steps[1].upsilon1 == base.steps[1].upsilon1);
}

TEST_CASE("sim options validation") {
    ffbs::SimOptions opts;
    CHECK_NOTHROW(opts.validate());

    opts.dt = 0.0;
    CHECK_THROWS_AS(opts.validate(), ffbs::ConfigError);

    opts = {};
    opts.dt = 0.5;
    opts.t_final = 1.0;  // shorter than 10 steps
    CHECK_THROWS_AS(opts.validate(), ffbs::ConfigError);

    opts = {};
    opts.log_stride = 0;
    CHECK_THROWS_AS(opts.validate(), ffbs::ConfigError);
}

TEST_CASE("zero-uncertainty chain settles") {
    const auto stack = chain_stack();
    ffbs::SimOptions opts;
    opts.t_final = 10.0;
    opts.log_stride = 10;
    const auto tr = ffbs::run_closed_loop(stack, opts);

    CHECK(tr.est_steps.empty());
    CHECK(tr.t.front() == 0.0);
    CHECK(tr.t.back() == doctest::Approx(10.0));
    // residual set of the practical finite-time result, not asymptotic zero
    CHECK(std::abs(tr.xi1.back()) < 1e-2);

    const auto m = ffbs::metrics(tr, 5.0, 10.0);
    CHECK(m.switch_duty == 1.0);
    CHECK(m.rms_approx_error == 0.0);
}

TEST_CASE("runs are deterministic") {
    const auto built = ffbs::build_scenario(ffbs::default_config());
    ffbs::SimOptions opts = built.opts;
    opts.t_final = 2.0;
    opts.log_stride = 5;

    const auto a = ffbs::run_closed_loop(built.stack, opts);
    const auto b = ffbs::run_closed_loop(built.stack, opts);
    REQUIRE(a.samples() == b.samples());
    for (size_t s = 0; s < a.samples(); ++s) {
        CHECK(a.xi1[s] == b.xi1[s]);
        CHECK(a.u[s] == b.u[s]);
        CHECK(a.eta[0][s] == b.eta[0][s]);
        CHECK(a.eta[1][s] == b.eta[1][s]);
        CHECK(a.w[0][s] == b.w[0][s]);
        CHECK(a.omega_norm[0][s] == b.omega_norm[0][s]);
    }
}

TEST_CASE("divergence aborts with the trace prefix") {
    const auto built = ffbs::build_scenario(ffbs::default_config());
    ffbs::SimOptions opts = built.opts;
    opts.t_final = 2.0;
    opts.divergence_limit = 0.4;  // below the initial state magnitude

    try {
        (void)ffbs::run_closed_loop(built.stack, opts);
        CHECK(false);
    } catch (const ffbs::DivergenceError& e) {
        CHECK(std::string(e.what()).find("divergence limit") != std::string::npos);
        CHECK(e.prefix.samples() >= 1);
        CHECK(e.t_abort > 0.0);
    }
}

TEST_CASE("metrics on hand-built traces") {
    const auto zero = flat_trace({0.0, 0.0, 0.0, 0.0});
    const auto mz = ffbs::metrics(zero, 0.0, 3.0);
    CHECK(mz.rms_tracking == 0.0);
    CHECK(mz.settle_time == 0.0);
    CHECK(mz.switch_duty == 1.0);  // no estimators: every sample counts as inside

    // sin over whole periods on the discrete grid: rms is exactly 1/sqrt(2)
    const int N = 400;
    std::vector<double> xs(N);
    for (int i = 0; i < N; ++i) xs[i] = std::sin(2.0 * kPi * i / N);
    const auto ms = ffbs::metrics(flat_trace(xs, 1.0 / N), 0.0, 1.0);
    CHECK(ms.rms_tracking == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    const auto settles = flat_trace({0.5, 0.2, 0.05, 0.01});
    CHECK(ffbs::metrics(settles, 0.0, 3.0).settle_time == doctest::Approx(2.0));

    const auto never = flat_trace({0.5, 0.2, 0.05, 0.3});
    CHECK(std::isinf(ffbs::metrics(never, 0.0, 3.0).settle_time));

    CHECK(ffbs::metrics(settles, 0.0, 3.0).max_abs_state == doctest::Approx(0.5));

    CHECK_THROWS_AS((void)ffbs::metrics(settles, 7.0, 9.0), ffbs::ConfigError);
    CHECK_THROWS_AS((void)ffbs::metrics(settles, 2.0, 1.0), ffbs::ConfigError);
}

TEST_CASE("compare_variants marks failures without aborting the rest") {
    const auto stack = chain_stack();
    ffbs::SimOptions opts;
    opts.t_final = 4.0;
    opts.log_stride = 10;

    const auto rows = ffbs::compare_variants(
        stack, opts, {ffbs::Variant::developed, ffbs::Variant::developed}, 2.0, 4.0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ok);
    CHECK(rows[1].ok);
    CHECK(rows[0].metrics.rms_tracking == rows[1].metrics.rms_tracking);
    CHECK(rows[0].tag == "developed");

    ffbs::SimOptions tight = opts;
    tight.divergence_limit = 0.4;
    const auto mixed = ffbs::compare_variants(
        stack, tight, {ffbs::Variant::developed, ffbs::Variant::fse_rbfnn_cfb}, 2.0, 4.0);
    REQUIRE(mixed.size() == 2);
    CHECK_FALSE(mixed[0].ok);
    CHECK_FALSE(mixed[1].ok);
    CHECK(!mixed[0].error.empty());

    CHECK_THROWS_AS(
        (void)ffbs::compare_variants(stack, opts, {ffbs::Variant::developed}, 2.0, 4.0),
        ffbs::ConfigError);
}
