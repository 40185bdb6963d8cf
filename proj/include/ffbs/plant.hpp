#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace ffbs {

// Per-step description of the strict-feedback dynamics
//   eta_dot_i = F_i(eta_1..i, t) + G_i(eta_1..i) * eta_{i+1},   eta_{n+1} = u.
// Steps without an uncertainty channel have no estimator attached and the
// controller treats them as fully known (switch indicator pinned to 1).
struct PlantStep {
    std::function<double(const Eigen::VectorXd&, double)> F;  // (eta_1..i, t) -> real
    std::function<double(const Eigen::VectorXd&)> G;          // (eta_1..i) -> positive real
    std::function<double(const Eigen::VectorXd&)> F_bound;    // smooth positive bound on |F|

    bool has_uncertainty = false;
    double period = 0.0;  // seconds, > 0 when has_uncertainty
    int param_dim = 0;    // q_i, >= 1 when has_uncertainty
    // True periodic parameter trajectory, kept only for reporting.
    std::function<Eigen::VectorXd(double)> p_true;
};

struct PlantModel {
    std::string name;
    std::vector<PlantStep> steps;
    double g_lower = 0.0;  // configured bracket on every G_i value
    double g_upper = 0.0;

    int order() const { return static_cast<int>(steps.size()); }
    void validate() const;
};

struct Reference {
    std::function<double(double)> y_d;
    std::function<double(double)> y_d_dot;
};

inline std::pair<double, double> reference_eval(const Reference& ref, double t) {
    return {ref.y_d(t), ref.y_d_dot(t)};
}

Eigen::VectorXd plant_deriv(const PlantModel& model, const Eigen::VectorXd& eta, double u,
                            double t);

// Inverted pendulum tracking case: second-order strict-feedback form with a
// |cos t|-modulated damping uncertainty on the acceleration channel.
struct Scenario {
    PlantModel model;
    Reference reference;
    Eigen::VectorXd eta0;
};

Scenario pendulum_example();

}  // namespace ffbs
