#include "ffbs/state.hpp"

#include "ffbs/errors.hpp"

namespace ffbs {

Eigen::Index StateLayout::flat_size() const {
    Eigen::Index size = order + 2 * (order - 1) + order;
    for (const auto& e : est)
        if (e.present) size += e.nodes + e.terms * e.params + 3;
    return size;
}

Eigen::VectorXd AugmentedState::flatten(const StateLayout& layout) const {
    Eigen::VectorXd flat(layout.flat_size());
    Eigen::Index pos = 0;
    flat.segment(pos, layout.order) = eta;
    pos += layout.order;
    for (const auto& f : filters) {
        flat(pos++) = f.eta_c;
        flat(pos++) = f.eta_d;
    }
    flat.segment(pos, layout.order) = delta;
    pos += layout.order;
    for (int i = 0; i < layout.order; ++i) {
        const auto& shape = layout.est[i];
        if (!shape.present) continue;
        const auto& a = adaptive[i];
        flat.segment(pos, shape.nodes) = a.omega_hat;
        pos += shape.nodes;
        flat.segment(pos, shape.terms * shape.params) =
            Eigen::Map<const Eigen::VectorXd>(a.l_hat.data(), a.l_hat.size());
        pos += shape.terms * shape.params;
        flat(pos++) = a.mu_hat;
        flat(pos++) = a.mu_n_hat;
        flat(pos++) = a.eta_pred;
    }
    return flat;
}

AugmentedState AugmentedState::unflatten(const StateLayout& layout,
                                         const Eigen::VectorXd& flat) {
    if (flat.size() != layout.flat_size())
        throw ConfigError("unflatten: vector length does not match the state layout");
    AugmentedState s = zero_state(layout);
    Eigen::Index pos = 0;
    s.eta = flat.segment(pos, layout.order);
    pos += layout.order;
    for (auto& f : s.filters) {
        f.eta_c = flat(pos++);
        f.eta_d = flat(pos++);
    }
    s.delta = flat.segment(pos, layout.order);
    pos += layout.order;
    for (int i = 0; i < layout.order; ++i) {
        const auto& shape = layout.est[i];
        if (!shape.present) continue;
        auto& a = s.adaptive[i];
        a.omega_hat = flat.segment(pos, shape.nodes);
        pos += shape.nodes;
        a.l_hat = Eigen::Map<const Eigen::MatrixXd>(flat.data() + pos, shape.terms,
                                                    shape.params);
        pos += shape.terms * shape.params;
        a.mu_hat = flat(pos++);
        a.mu_n_hat = flat(pos++);
        a.eta_pred = flat(pos++);
    }
    return s;
}

AugmentedState zero_state(const StateLayout& layout) {
    AugmentedState s;
    s.eta = Eigen::VectorXd::Zero(layout.order);
    s.filters.resize(layout.order - 1);
    s.delta = Eigen::VectorXd::Zero(layout.order);
    s.adaptive.resize(layout.order);
    for (int i = 0; i < layout.order; ++i) {
        const auto& shape = layout.est[i];
        if (!shape.present) continue;
        s.adaptive[i].omega_hat = Eigen::VectorXd::Zero(shape.nodes);
        s.adaptive[i].l_hat = Eigen::MatrixXd::Zero(shape.terms, shape.params);
    }
    return s;
}

}  // namespace ffbs
