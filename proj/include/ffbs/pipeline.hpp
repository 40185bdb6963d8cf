#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "ffbs/controller.hpp"
#include "ffbs/mathkit.hpp"
#include "ffbs/plant.hpp"
#include "ffbs/state.hpp"

namespace ffbs {

// Everything needed to close the loop: plant, reference, gains, the
// estimators of the uncertainty-bearing steps, and the validity regions that
// drive the switch indicators. state_regions has one region per plant state;
// param_regions[i] has one region per estimated parameter of step i+1.
struct ControlStack {
    PlantModel model;
    Reference reference;
    ControllerGains gains;
    std::vector<std::optional<FseRbfEstimator>> estimators;
    std::vector<SwitchRegion> state_regions;
    std::vector<std::vector<SwitchRegion>> param_regions;
    Eigen::VectorXd eta0;

    StateLayout layout() const;
    void validate() const;
};

struct StepDiagnostics {
    double w = 1.0;
    Eigen::VectorXd p_hat;   // empty on steps without an estimator
    double omega_h = 0.0;    // omega_hat . h
    double f_true = 0.0;     // F_i at the current state and time
};

struct PipelineResult {
    double u = 0.0;
    std::vector<double> alphas;
    AugmentedState deriv;  // d/dt of every augmented-state member
    LoopErrors errors;
    std::vector<StepDiagnostics> diag;
};

// One full evaluation of the control law chain at (state, t): tracking
// errors, switch indicators, estimator outputs, virtual controls, u, and the
// time derivative of the complete augmented state. Pure function; throws
// NumericalError naming the first non-finite quantity it produces.
PipelineResult control_pipeline(const ControlStack& stack, const AugmentedState& aug,
                                double t);

}  // namespace ffbs
