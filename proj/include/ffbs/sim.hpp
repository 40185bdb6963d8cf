#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ffbs/errors.hpp"
#include "ffbs/pipeline.hpp"
#include "ffbs/trace.hpp"

namespace ffbs {

enum class Variant { developed, developed_without_composite, fse_rbfnn_cfb };

Variant parse_variant(const std::string& tag);
std::string variant_tag(Variant v);

// Baselines are ablations of the developed law: the non-composite variant
// removes the prediction-error drive; the plain command-filtered variant
// additionally removes every finite-time term and the filter's fractional
// branch.
ControllerGains apply_variant(ControllerGains gains, Variant v);

struct SimOptions {
    Variant variant = Variant::developed;
    double dt = 1e-3;
    double t_final = 20.0;
    int log_stride = 1;
    std::optional<Eigen::VectorXd> eta0_override;
    double divergence_limit = 1e6;

    void validate() const;
};

// Raised when a state magnitude crosses the divergence limit or a derivative
// turns non-finite mid-run; carries whatever was logged up to that point.
struct DivergenceError : NumericalError {
    Trace prefix;
    DivergenceError(const std::string& what, double t, Trace partial)
        : NumericalError(what, t), prefix(std::move(partial)) {}
};

using FlatDynamics = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

// Classical fourth-order Runge-Kutta update on a flat state vector.
Eigen::VectorXd rk4_step(const Eigen::VectorXd& x, double t, double dt,
                         const FlatDynamics& dynamics);

// Integrates plant + controller from t=0 to t_final. Filter states are
// seeded from one pipeline evaluation at t=0 so each eta_c starts on its
// virtual control. Deterministic: identical inputs give identical traces.
Trace run_closed_loop(const ControlStack& stack, const SimOptions& opts);

struct RunMetrics {
    double rms_tracking = 0.0;
    double rms_approx_error = 0.0;
    double max_abs_state = 0.0;
    double switch_duty = 0.0;
    double settle_time = 0.0;  // +inf when |xi1| never stays under the threshold
};

// Window statistics over [t_lo, t_hi]; settle_time scans the whole trace.
// switch_duty counts samples whose every switch indicator equals 1 exactly.
RunMetrics metrics(const Trace& trace, double t_lo, double t_hi,
                   double settle_threshold = 0.1);

struct VariantResult {
    std::string tag;
    bool ok = false;
    std::string error;
    RunMetrics metrics;
    Trace trace;
};

// Runs each variant under identical plant/reference/initial state. A failing
// variant is marked and does not abort the others.
std::vector<VariantResult> compare_variants(const ControlStack& stack,
                                            const SimOptions& base,
                                            const std::vector<Variant>& variants,
                                            double window_lo, double window_hi);

}  // namespace ffbs
