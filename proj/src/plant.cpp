#include "ffbs/plant.hpp"

#include <cmath>
#include <numbers>

#include "ffbs/errors.hpp"

namespace ffbs {

void PlantModel::validate() const {
    if (steps.empty()) throw ConfigError("plant needs at least one step");
    if (!(g_lower > 0.0) || !(g_upper > g_lower))
        throw ConfigError("plant gain bracket needs 0 < g_lower < g_upper");
    for (const auto& step : steps) {
        if (!step.F || !step.G || !step.F_bound)
            throw ConfigError("plant step needs F, G and F_bound functions");
        if (step.has_uncertainty) {
            if (!(step.period > 0.0))
                throw ConfigError("uncertainty channel period must be > 0");
            if (step.param_dim < 1)
                throw ConfigError("uncertainty channel param_dim must be >= 1");
        }
    }
}

Eigen::VectorXd plant_deriv(const PlantModel& model, const Eigen::VectorXd& eta, double u,
                            double t) {
    const int n = model.order();
    if (eta.size() != n) throw ConfigError("plant_deriv: state length must equal plant order");
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        const auto bar = eta.head(i + 1);
        const double next = i + 1 < n ? eta(i + 1) : u;
        d(i) = model.steps[i].F(bar, t) + model.steps[i].G(bar) * next;
    }
    return d;
}

Scenario pendulum_example() {
    PlantModel model;
    model.name = "pendulum";
    model.g_lower = 0.5;
    model.g_upper = 3.0;

    PlantStep s1;
    s1.F = [](const Eigen::VectorXd&, double) { return 0.0; };
    s1.G = [](const Eigen::VectorXd&) { return 1.0; };
    s1.F_bound = [](const Eigen::VectorXd&) { return 1.0; };

    // M g L / (2 J) = 2*9.8*1/(2*0.5) = 19.6 and 1/J = 2.
    PlantStep s2;
    s2.F = [](const Eigen::VectorXd& bar, double t) {
        return 2.5 * bar(1) * std::abs(std::cos(t)) - 19.6 * std::sin(bar(0));
    };
    s2.G = [](const Eigen::VectorXd&) { return 2.0; };
    s2.F_bound = [](const Eigen::VectorXd& bar) { return 1.0 + bar(1) * bar(1); };
    s2.has_uncertainty = true;
    s2.period = std::numbers::pi;
    s2.param_dim = 1;
    s2.p_true = [](double t) {
        return Eigen::VectorXd::Constant(1, std::abs(std::cos(t)));
    };

    model.steps = {s1, s2};

    Reference ref;
    ref.y_d = [](double t) { return std::sin(t); };
    ref.y_d_dot = [](double t) { return std::cos(t); };

    Eigen::VectorXd eta0(2);
    eta0 << 0.5, 0.0;
    return {model, ref, eta0};
}

}  // namespace ffbs
