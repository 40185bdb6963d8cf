#pragma once

#include <Eigen/Core>

#include <vector>

#include "ffbs/controller.hpp"

namespace ffbs {

struct EstimatorShape {
    bool present = false;
    int nodes = 0;
    int terms = 0;
    int params = 0;
};

// Shape information needed to map the augmented state to and from a flat
// vector. Flat order:
//   eta(1..n),
//   (eta_c, eta_d) for steps 2..n,
//   delta(1..n),
//   then per estimator-bearing step in ascending order:
//     omega_hat, l_hat (column-major), mu_hat, mu_n_hat, eta_pred.
struct StateLayout {
    int order = 0;
    std::vector<EstimatorShape> est;  // one entry per step

    Eigen::Index flat_size() const;
};

struct AugmentedState {
    Eigen::VectorXd eta;
    std::vector<FilterState> filters;  // order-1 entries, for steps 2..n
    Eigen::VectorXd delta;
    std::vector<AdaptiveState> adaptive;  // one entry per step; unused when absent

    Eigen::VectorXd flatten(const StateLayout& layout) const;
    static AugmentedState unflatten(const StateLayout& layout, const Eigen::VectorXd& flat);
};

// All-zero state with correctly sized members.
AugmentedState zero_state(const StateLayout& layout);

}  // namespace ffbs
