#include "ffbs/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "ffbs/errors.hpp"

namespace ffbs {

using nlohmann::json;

namespace {

json region_json(double c1, double c2, int order) {
    return json{{"c1", c1}, {"c2", c2}, {"order", order}};
}

json default_step(double k) {
    return json{
        {"k", k},
        {"r", 1.0},
        {"n", 0.5},
        {"kappa", 0.1},
        {"kappa_n", 0.1},
        {"tau_sigma", 0.01},
        {"eps_sigma", 0.01},
        {"gamma_s", 5.0},
        {"gamma_decay", 0.001},
        {"gamma1", 15.0},
        {"gamma2", 0.001},
        {"gamma3", 0.001},
        {"gamma_n1", 15.0},
        {"gamma_n2", 0.001},
        {"gamma_n3", 0.001},
        {"upsilon1", 10.0},
        {"upsilon2", 1.0},
        {"filter",
         {{"a1", 4.0}, {"a2", 4.0}, {"b1", 4.0}, {"b2", 4.0}, {"eps_c", 0.05},
          {"m_d", 0.6}, {"m_ic", 0.7}}},
        {"estimator", nullptr},
    };
}

json default_estimator() {
    return json{
        {"nodes_per_dim", 6},
        {"width", 2.0},
        {"fourier_terms", 7},
        {"period", std::numbers::pi},
        {"state_ranges", json::array()},
        {"param_ranges", json::array()},
        {"param_regions", json::array()},
        {"gamma_omega", 10.0},
        {"gamma_l", 15.0},
    };
}

const char* const kTopKeys[] = {"schema_version", "plant",       "reference",
                                "variant",        "dt",          "t_final",
                                "log_stride",     "out_dir",     "plots",
                                "initial_state",  "m_c",         "state_regions",
                                "steps"};
const char* const kStepKeys[] = {
    "k",       "r",        "n",        "kappa",    "kappa_n",  "tau_sigma",
    "eps_sigma", "gamma_s", "gamma_decay", "gamma1", "gamma2", "gamma3",
    "gamma_n1", "gamma_n2", "gamma_n3", "upsilon1", "upsilon2", "filter",
    "estimator"};
const char* const kFilterKeys[] = {"a1", "a2", "b1", "b2", "eps_c", "m_d", "m_ic"};
const char* const kEstimatorKeys[] = {"nodes_per_dim", "width",        "fourier_terms",
                                      "period",        "state_ranges", "param_ranges",
                                      "param_regions", "gamma_omega",  "gamma_l"};
const char* const kRegionKeys[] = {"c1", "c2", "order"};
const char* const kReferenceKeys[] = {"type", "amplitude", "omega", "phase"};
const char* const kRatioKeys[] = {"num", "den"};
const char* const kPlantKeys[] = {"name", "g_lower", "g_upper", "steps"};
const char* const kPlantStepKeys[] = {"g", "f_terms", "f_bound", "uncertainty"};
const char* const kTermKeys[] = {"coef", "powers", "trig"};
const char* const kTrigKeys[] = {"fn", "arg", "scale"};
const char* const kBoundKeys[] = {"constant", "terms"};
const char* const kUncertaintyKeys[] = {"period", "param_dim"};

template <size_t N>
void check_keys(const json& obj, const char* const (&allowed)[N], const std::string& path) {
    if (!obj.is_object()) throw ConfigError("config: " + path + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("config: unknown key " + path + "." + key);
    }
}

void merge_scalars(json& base, const json& user, const std::string& path) {
    for (const auto& [key, value] : user.items()) {
        if (base.contains(key) && base.at(key).is_object() && value.is_object()) {
            merge_scalars(base.at(key), value, path + "." + key);
        } else {
            base[key] = value;
        }
    }
}

int plant_order(const json& plant) {
    if (plant.is_string()) {
        if (plant.get<std::string>() == "pendulum") return 2;
        throw ConfigError("config: unknown plant name " + plant.get<std::string>() +
                          " (expected \"pendulum\" or a plant object)");
    }
    check_keys(plant, kPlantKeys, "plant");
    if (!plant.contains("steps") || !plant.at("steps").is_array() ||
        plant.at("steps").size() < 2)
        throw ConfigError("config: plant.steps must be an array of at least two steps");
    return static_cast<int>(plant.at("steps").size());
}

double num_at(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key))
        throw ConfigError("config: missing key " + path + "." + key);
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("config: " + path + "." + key + " must be a number");
    return v.get<double>();
}

int int_at(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key))
        throw ConfigError("config: missing key " + path + "." + key);
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("config: " + path + "." + key + " must be an integer");
    return v.get<int>();
}

SwitchRegion parse_region(const json& obj, const std::string& path) {
    check_keys(obj, kRegionKeys, path);
    SwitchRegion r;
    r.inner_bound = num_at(obj, "c1", path);
    r.outer_bound = num_at(obj, "c2", path);
    r.smooth_order = int_at(obj, "order", path);
    return r;
}

double pow_int(double base, int exp) {
    double v = 1.0;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

struct Term {
    double coef = 0.0;
    std::vector<int> powers;
    int trig_fn = 0;  // 0 none, 1 sin, 2 cos, 3 abs_sin, 4 abs_cos
    int trig_arg = 0; // 0 => t, else 1-based state index
    double trig_scale = 1.0;

    double eval(const Eigen::VectorXd& eta, double t) const {
        double v = coef;
        for (size_t j = 0; j < powers.size(); ++j)
            v *= pow_int(eta(static_cast<Eigen::Index>(j)), powers[j]);
        if (trig_fn != 0) {
            const double s = trig_scale * (trig_arg == 0 ? t : eta(trig_arg - 1));
            switch (trig_fn) {
                case 1: v *= std::sin(s); break;
                case 2: v *= std::cos(s); break;
                case 3: v *= std::abs(std::sin(s)); break;
                case 4: v *= std::abs(std::cos(s)); break;
            }
        }
        return v;
    }
};

Term parse_term(const json& obj, int arity, bool allow_time, const std::string& path) {
    check_keys(obj, kTermKeys, path);
    Term term;
    term.coef = num_at(obj, "coef", path);
    if (obj.contains("powers")) {
        const json& p = obj.at("powers");
        if (!p.is_array() || static_cast<int>(p.size()) != arity)
            throw ConfigError("config: " + path + ".powers must have one entry per state up to this step");
        for (const auto& e : p) {
            if (!e.is_number_integer() || e.get<int>() < 0)
                throw ConfigError("config: " + path + ".powers entries must be integers >= 0");
            term.powers.push_back(e.get<int>());
        }
    } else {
        term.powers.assign(static_cast<size_t>(arity), 0);
    }
    if (obj.contains("trig") && !obj.at("trig").is_null()) {
        const json& tr = obj.at("trig");
        check_keys(tr, kTrigKeys, path + ".trig");
        const std::string fn = tr.value("fn", "sin");
        if (fn == "sin") term.trig_fn = 1;
        else if (fn == "cos") term.trig_fn = 2;
        else if (fn == "abs_sin") term.trig_fn = 3;
        else if (fn == "abs_cos") term.trig_fn = 4;
        else throw ConfigError("config: " + path + ".trig.fn must be sin, cos, abs_sin or abs_cos");
        if (tr.contains("arg") && tr.at("arg").is_string()) {
            if (tr.at("arg").get<std::string>() != "t")
                throw ConfigError("config: " + path + ".trig.arg must be \"t\" or a state index");
            if (!allow_time)
                throw ConfigError("config: " + path + ".trig.arg cannot be \"t\" in a bound function");
            term.trig_arg = 0;
        } else {
            const int idx = tr.contains("arg") ? int_at(tr, "arg", path + ".trig") : 1;
            if (idx < 1 || idx > arity)
                throw ConfigError("config: " + path + ".trig.arg state index out of range");
            term.trig_arg = idx;
        }
        term.trig_scale = tr.contains("scale") ? num_at(tr, "scale", path + ".trig") : 1.0;
    }
    return term;
}

std::vector<Term> parse_terms(const json& arr, int arity, bool allow_time,
                              const std::string& path) {
    if (!arr.is_array()) throw ConfigError("config: " + path + " must be an array");
    std::vector<Term> terms;
    for (size_t i = 0; i < arr.size(); ++i)
        terms.push_back(parse_term(arr[i], arity, allow_time, path + "[" + std::to_string(i) + "]"));
    return terms;
}

PlantModel build_custom_plant(const json& plant) {
    PlantModel model;
    model.name = plant.value("name", "custom");
    model.g_lower = num_at(plant, "g_lower", "plant");
    model.g_upper = num_at(plant, "g_upper", "plant");
    const json& steps = plant.at("steps");
    for (size_t i = 0; i < steps.size(); ++i) {
        const std::string path = "plant.steps[" + std::to_string(i) + "]";
        const json& sj = steps[i];
        check_keys(sj, kPlantStepKeys, path);
        PlantStep step;
        const double g = num_at(sj, "g", path);
        step.G = [g](const Eigen::VectorXd&) { return g; };
        const int arity = static_cast<int>(i) + 1;
        auto f_terms = parse_terms(sj.contains("f_terms") ? sj.at("f_terms") : json::array(),
                                   arity, true, path + ".f_terms");
        step.F = [f_terms](const Eigen::VectorXd& eta, double t) {
            double v = 0.0;
            for (const auto& term : f_terms) v += term.eval(eta, t);
            return v;
        };
        if (sj.contains("uncertainty") && !sj.at("uncertainty").is_null()) {
            const json& unc = sj.at("uncertainty");
            check_keys(unc, kUncertaintyKeys, path + ".uncertainty");
            step.has_uncertainty = true;
            step.period = num_at(unc, "period", path + ".uncertainty");
            step.param_dim = int_at(unc, "param_dim", path + ".uncertainty");
            if (!sj.contains("f_bound"))
                throw ConfigError("config: " + path + " with uncertainty needs f_bound");
            const json& fb = sj.at("f_bound");
            check_keys(fb, kBoundKeys, path + ".f_bound");
            const double constant = fb.contains("constant")
                                        ? num_at(fb, "constant", path + ".f_bound")
                                        : 0.0;
            auto b_terms = parse_terms(fb.contains("terms") ? fb.at("terms") : json::array(),
                                       arity, false, path + ".f_bound.terms");
            step.F_bound = [constant, b_terms](const Eigen::VectorXd& eta) {
                double v = constant;
                for (const auto& term : b_terms) v += term.eval(eta, 0.0);
                return v;
            };
        } else {
            step.F_bound = [](const Eigen::VectorXd&) { return 1.0; };
        }
        model.steps.push_back(std::move(step));
    }
    return model;
}

Reference build_reference(const json& ref) {
    check_keys(ref, kReferenceKeys, "reference");
    if (ref.value("type", "sinusoid") != "sinusoid")
        throw ConfigError("config: reference.type must be \"sinusoid\"");
    const double amp = num_at(ref, "amplitude", "reference");
    const double omega = num_at(ref, "omega", "reference");
    const double phase = num_at(ref, "phase", "reference");
    Reference r;
    r.y_d = [amp, omega, phase](double t) { return amp * std::sin(omega * t + phase); };
    r.y_d_dot = [amp, omega, phase](double t) {
        return amp * omega * std::cos(omega * t + phase);
    };
    return r;
}

std::vector<std::pair<double, double>> parse_ranges(const json& arr, const std::string& path) {
    if (!arr.is_array()) throw ConfigError("config: " + path + " must be an array of [lo, hi]");
    std::vector<std::pair<double, double>> out;
    for (size_t i = 0; i < arr.size(); ++i) {
        const json& e = arr[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError("config: " + path + "[" + std::to_string(i) +
                              "] must be a [lo, hi] pair");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

}  // namespace

json default_config() {
    json est = default_estimator();
    est["state_ranges"] = json::array({json::array({-1.5, 1.5}), json::array({-1.5, 1.5})});
    est["param_ranges"] = json::array({json::array({-3.0, 3.0})});
    est["param_regions"] = json::array({region_json(3.0, 4.5, 2)});

    json step2 = default_step(5.0);
    step2["estimator"] = est;

    return json{
        {"schema_version", 1},
        {"plant", "pendulum"},
        {"reference", {{"type", "sinusoid"}, {"amplitude", 1.0}, {"omega", 1.0}, {"phase", 0.0}}},
        {"variant", "developed"},
        {"dt", 1e-3},
        {"t_final", 20.0},
        {"log_stride", 1},
        {"out_dir", "out"},
        {"plots", true},
        {"initial_state", json::array({0.5, 0.0})},
        {"m_c", {{"num", 3}, {"den", 5}}},
        {"state_regions",
         json::array({region_json(1.5, 2.25, 2), region_json(1.5, 2.25, 2)})},
        {"steps", json::array({default_step(8.0), step2})},
    };
}

json resolve_config(const json& user) {
    if (!user.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(user, kTopKeys, "config");
    if (user.contains("schema_version") &&
        (!user.at("schema_version").is_number_integer() ||
         user.at("schema_version").get<int>() != 1))
        throw ConfigError("config: schema_version must be 1");

    const json plant = user.contains("plant") ? user.at("plant") : json("pendulum");
    const int n = plant_order(plant);

    json base = default_config();
    if (!plant.is_string()) {
        base["plant"] = plant;
        base["initial_state"] = json::array();
        base["state_regions"] = json::array();
        base["steps"] = json::array();
        for (int i = 0; i < n; ++i) {
            base["initial_state"].push_back(0.0);
            base["state_regions"].push_back(region_json(1.5, 2.25, 2));
            base["steps"].push_back(default_step(i == 0 ? 8.0 : 5.0));
        }
    }

    // Key allowlists per nested object, then element-wise merge for steps.
    if (user.contains("reference")) check_keys(user.at("reference"), kReferenceKeys, "reference");
    if (user.contains("m_c")) check_keys(user.at("m_c"), kRatioKeys, "m_c");
    if (user.contains("state_regions")) {
        const json& regions = user.at("state_regions");
        if (!regions.is_array() || static_cast<int>(regions.size()) != n)
            throw ConfigError("config: state_regions must have one region per plant state");
        for (size_t i = 0; i < regions.size(); ++i)
            check_keys(regions[i], kRegionKeys, "state_regions[" + std::to_string(i) + "]");
        base["state_regions"] = regions;
    }
    if (user.contains("initial_state")) {
        const json& init = user.at("initial_state");
        if (!init.is_array() || static_cast<int>(init.size()) != n)
            throw ConfigError("config: initial_state length must equal the plant order");
        base["initial_state"] = init;
    }
    if (user.contains("steps")) {
        const json& steps = user.at("steps");
        if (!steps.is_array() || static_cast<int>(steps.size()) != n)
            throw ConfigError("config: steps must have one entry per plant state");
        for (size_t i = 0; i < steps.size(); ++i) {
            const std::string path = "steps[" + std::to_string(i) + "]";
            const json& sj = steps[i];
            check_keys(sj, kStepKeys, path);
            json& bj = base["steps"][i];
            for (const auto& [key, value] : sj.items()) {
                if (key == "filter") {
                    check_keys(value, kFilterKeys, path + ".filter");
                    merge_scalars(bj["filter"], value, path + ".filter");
                } else if (key == "estimator") {
                    if (value.is_null()) {
                        bj["estimator"] = nullptr;
                    } else {
                        check_keys(value, kEstimatorKeys, path + ".estimator");
                        if (bj["estimator"].is_null()) bj["estimator"] = default_estimator();
                        merge_scalars(bj["estimator"], value, path + ".estimator");
                    }
                } else {
                    bj[key] = value;
                }
            }
        }
    }

    for (const char* k : {"variant", "out_dir"})
        if (user.contains(k)) base[k] = user.at(k);
    for (const char* k : {"dt", "t_final"})
        if (user.contains(k)) base[k] = user.at(k);
    for (const char* k : {"log_stride"})
        if (user.contains(k)) base[k] = user.at(k);
    if (user.contains("plots")) base["plots"] = user.at("plots");
    if (user.contains("reference")) merge_scalars(base["reference"], user.at("reference"), "reference");
    if (user.contains("m_c")) merge_scalars(base["m_c"], user.at("m_c"), "m_c");
    return base;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json user;
    try {
        user = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return resolve_config(user);
}

BuiltScenario build_scenario(const json& resolved) {
    try {
        BuiltScenario out;
        const json& plant = resolved.at("plant");
        Scenario scenario;
        if (plant.is_string() && plant.get<std::string>() == "pendulum") {
            scenario = pendulum_example();
            out.stack.model = scenario.model;
        } else {
            out.stack.model = build_custom_plant(plant);
        }
        out.stack.reference = build_reference(resolved.at("reference"));
        const int n = out.stack.model.order();

        const json& init = resolved.at("initial_state");
        if (static_cast<int>(init.size()) != n)
            throw ConfigError("config: initial_state length must equal the plant order");
        out.stack.eta0.resize(n);
        for (int i = 0; i < n; ++i) out.stack.eta0(i) = init[static_cast<size_t>(i)].get<double>();

        out.stack.gains.m_c.num = int_at(resolved.at("m_c"), "num", "m_c");
        out.stack.gains.m_c.den = int_at(resolved.at("m_c"), "den", "m_c");

        const json& regions = resolved.at("state_regions");
        if (static_cast<int>(regions.size()) != n)
            throw ConfigError("config: state_regions must have one region per plant state");
        for (size_t i = 0; i < regions.size(); ++i)
            out.stack.state_regions.push_back(
                parse_region(regions[i], "state_regions[" + std::to_string(i) + "]"));

        const json& steps = resolved.at("steps");
        if (static_cast<int>(steps.size()) != n)
            throw ConfigError("config: steps must have one entry per plant state");
        out.stack.estimators.resize(n);
        out.stack.param_regions.resize(n);
        for (int i = 0; i < n; ++i) {
            const std::string path = "steps[" + std::to_string(i) + "]";
            const json& sj = steps[static_cast<size_t>(i)];
            StepGains g;
            g.k = num_at(sj, "k", path);
            g.r = num_at(sj, "r", path);
            g.n = num_at(sj, "n", path);
            g.kappa = num_at(sj, "kappa", path);
            g.kappa_n = num_at(sj, "kappa_n", path);
            g.tau_sigma = num_at(sj, "tau_sigma", path);
            g.eps_sigma = num_at(sj, "eps_sigma", path);
            g.gamma_s = num_at(sj, "gamma_s", path);
            g.gamma_decay = num_at(sj, "gamma_decay", path);
            g.gamma1 = num_at(sj, "gamma1", path);
            g.gamma2 = num_at(sj, "gamma2", path);
            g.gamma3 = num_at(sj, "gamma3", path);
            g.gamma_n1 = num_at(sj, "gamma_n1", path);
            g.gamma_n2 = num_at(sj, "gamma_n2", path);
            g.gamma_n3 = num_at(sj, "gamma_n3", path);
            g.upsilon1 = num_at(sj, "upsilon1", path);
            g.upsilon2 = num_at(sj, "upsilon2", path);
            const json& fj = sj.at("filter");
            g.a1 = num_at(fj, "a1", path + ".filter");
            g.a2 = num_at(fj, "a2", path + ".filter");
            g.b1 = num_at(fj, "b1", path + ".filter");
            g.b2 = num_at(fj, "b2", path + ".filter");
            g.eps_c = num_at(fj, "eps_c", path + ".filter");
            g.m_d = num_at(fj, "m_d", path + ".filter");
            g.m_ic = num_at(fj, "m_ic", path + ".filter");

            const json& ej = sj.at("estimator");
            const bool plant_unc = out.stack.model.steps[static_cast<size_t>(i)].has_uncertainty;
            if (ej.is_null() != !plant_unc)
                throw ConfigError("config: " + path +
                                  ".estimator must be present exactly on uncertain plant steps");
            if (!ej.is_null()) {
                FseRbfEstimator est;
                est.state_dim = i + 1;
                est.param_dim = out.stack.model.steps[static_cast<size_t>(i)].param_dim;
                const int per_dim = int_at(ej, "nodes_per_dim", path + ".estimator");
                const double width = num_at(ej, "width", path + ".estimator");
                auto s_ranges = parse_ranges(ej.at("state_ranges"), path + ".estimator.state_ranges");
                auto p_ranges = parse_ranges(ej.at("param_ranges"), path + ".estimator.param_ranges");
                if (static_cast<int>(s_ranges.size()) != est.state_dim)
                    throw ConfigError("config: " + path +
                                      ".estimator.state_ranges needs one range per state up to this step");
                if (static_cast<int>(p_ranges.size()) != est.param_dim)
                    throw ConfigError("config: " + path +
                                      ".estimator.param_ranges needs one range per estimated parameter");
                std::vector<std::pair<double, double>> ranges = s_ranges;
                ranges.insert(ranges.end(), p_ranges.begin(), p_ranges.end());
                est.centers = grid_centers(ranges, per_dim);
                est.widths = Eigen::VectorXd::Constant(est.centers.rows(), width);
                est.fourier.term_count = int_at(ej, "fourier_terms", path + ".estimator");
                est.fourier.period = ej.contains("period")
                                         ? num_at(ej, "period", path + ".estimator")
                                         : out.stack.model.steps[static_cast<size_t>(i)].period;
                g.gamma_omega = num_at(ej, "gamma_omega", path + ".estimator") *
                                Eigen::MatrixXd::Identity(est.centers.rows(), est.centers.rows());
                g.gamma_l = num_at(ej, "gamma_l", path + ".estimator") *
                            Eigen::MatrixXd::Identity(est.fourier.term_count,
                                                      est.fourier.term_count);
                const json& prj = ej.at("param_regions");
                if (static_cast<int>(prj.size()) != est.param_dim)
                    throw ConfigError("config: " + path +
                                      ".estimator.param_regions needs one region per estimated parameter");
                for (size_t j = 0; j < prj.size(); ++j)
                    out.stack.param_regions[static_cast<size_t>(i)].push_back(parse_region(
                        prj[j], path + ".estimator.param_regions[" + std::to_string(j) + "]"));
                out.stack.estimators[static_cast<size_t>(i)] = std::move(est);
            }
            out.stack.gains.steps.push_back(std::move(g));
        }

        out.opts.variant = parse_variant(resolved.at("variant").get<std::string>());
        out.opts.dt = resolved.at("dt").get<double>();
        out.opts.t_final = resolved.at("t_final").get<double>();
        out.opts.log_stride = resolved.at("log_stride").get<int>();
        out.out_dir = resolved.at("out_dir").get<std::string>();
        out.plots = resolved.at("plots").get<bool>();

        out.stack.validate();
        out.opts.validate();
        return out;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

std::string serialize_config(const json& resolved) { return resolved.dump(2) + "\n"; }

}  // namespace ffbs
