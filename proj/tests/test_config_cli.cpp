#include "ffbs/config.hpp"

#include "ffbs/cli.hpp"
#include "ffbs/errors.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string config_error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ffbs::ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_cli(std::initializer_list<std::string> args) {
    std::vector<std::string> all{"ffbs"};
    all.insert(all.end(), args);
    std::vector<const char*> argv;
    argv.reserve(all.size());
    for (const auto& s : all) argv.push_back(s.c_str());
    return ffbs::cli_main(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / ("ffbs_tests_" + leaf);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("defaults resolve to the pendulum scenario") {
    const json cfg = ffbs::resolve_config(json::object());
    CHECK(cfg.at("plant") == "pendulum");
    CHECK(cfg.at("dt") == 1e-3);
    CHECK(cfg.at("t_final") == 20.0);
    CHECK(cfg.at("steps")[0].at("k") == 8.0);
    CHECK(cfg.at("steps")[1].at("k") == 5.0);
    CHECK(cfg.at("steps")[0].at("estimator").is_null());
    CHECK(cfg.at("steps")[1].at("estimator").at("nodes_per_dim") == 6);
    CHECK(cfg.at("steps")[1].at("estimator").at("fourier_terms") == 7);
    CHECK(cfg.at("m_c").at("num") == 3);

    const auto built = ffbs::build_scenario(cfg);
    CHECK(built.stack.model.name == "pendulum");
    CHECK(built.stack.estimators[1]->node_count() == 216);
    CHECK(built.stack.estimators[1]->widths[0] == 2.0);
    CHECK(built.stack.gains.steps[1].gamma_omega(0, 0) == 10.0);
    CHECK(built.stack.gains.steps[1].gamma_l(0, 0) == 15.0);
    CHECK(built.stack.gains.steps[1].gamma_s == 5.0);
    CHECK(built.stack.state_regions[0].inner_bound == 1.5);
    CHECK(built.stack.param_regions[1][0].inner_bound == 3.0);
    CHECK(built.out_dir == "out");
    CHECK(built.plots);
}

TEST_CASE("config round-trips through serialization") {
    const json resolved = ffbs::resolve_config(json::object());
    const std::string text = ffbs::serialize_config(resolved);
    const json reparsed = ffbs::resolve_config(json::parse(text));
    CHECK(reparsed == resolved);

    json user = json::object();
    user["dt"] = 5e-4;
    user["steps"] = json::array({json::object(), json{{"gamma_s", 0.0}}});
    const json custom = ffbs::resolve_config(user);
    CHECK(custom.at("dt") == 5e-4);
    CHECK(custom.at("steps")[1].at("gamma_s") == 0.0);
    CHECK(custom.at("steps")[0].at("k") == 8.0);  // untouched defaults survive
    CHECK(ffbs::resolve_config(json::parse(ffbs::serialize_config(custom))) == custom);
}

TEST_CASE("unknown keys are named") {
    CHECK(config_error_of([] { (void)ffbs::resolve_config(json{{"dtt", 1e-3}}); })
              .find("config.dtt") != std::string::npos);

    json nested = json::object();
    nested["steps"] = json::array(
        {json::object(), json{{"estimator", json{{"widthz", 2.0}}}}});
    CHECK(config_error_of([&] { (void)ffbs::resolve_config(nested); })
              .find("steps[1].estimator.widthz") != std::string::npos);

    json region = json::object();
    region["state_regions"] =
        json::array({json{{"c1", 1.0}, {"c2", 2.0}, {"order", 2}},
                     json{{"c1", 1.0}, {"c3", 2.0}, {"order", 2}}});
    CHECK(config_error_of([&] { (void)ffbs::resolve_config(region); })
              .find("state_regions[1].c3") != std::string::npos);
}

TEST_CASE("constraint violations are named") {
    json half = json::object();
    half["m_c"] = json{{"num", 1}, {"den", 2}};
    CHECK(config_error_of([&] {
              (void)ffbs::build_scenario(ffbs::resolve_config(half));
          }).find("(0.5, 1)") != std::string::npos);

    json wrong_len = json{{"initial_state", json::array({1.0})}};
    CHECK_THROWS_AS((void)ffbs::resolve_config(wrong_len), ffbs::ConfigError);

    json bad_variant = json{{"variant", "undeveloped"}};
    CHECK(config_error_of([&] {
              (void)ffbs::build_scenario(ffbs::resolve_config(bad_variant));
          }).find("unknown variant") != std::string::npos);

    json bad_schema = json{{"schema_version", 2}};
    CHECK_THROWS_AS((void)ffbs::resolve_config(bad_schema), ffbs::ConfigError);
}

TEST_CASE("custom plants build from term lists") {
    json plant = json{
        {"g_lower", 0.5},
        {"g_upper", 2.0},
        {"steps",
         json::array(
             {json{{"g", 1.0}},
              json{{"g", 1.0},
                   {"f_terms", json::array({json{{"coef", 2.5},
                                                 {"powers", json::array({0, 1})},
                                                 {"trig", json{{"fn", "abs_cos"},
                                                               {"arg", "t"}}}}})},
                   {"uncertainty", json{{"period", 3.141592653589793}, {"param_dim", 1}}},
                   {"f_bound",
                    json{{"constant", 1.0},
                         {"terms", json::array({json{{"coef", 1.0},
                                                     {"powers", json::array({0, 2})}}})}}}}})}};
    json user = json{{"plant", plant}};
    user["steps"] = json::array(
        {json::object(),
         json{{"estimator",
               json{{"state_ranges", json::array({json::array({-2.0, 2.0}),
                                                  json::array({-2.0, 2.0})})},
                    {"param_ranges", json::array({json::array({-1.5, 1.5})})},
                    {"param_regions",
                     json::array({json{{"c1", 2.0}, {"c2", 3.0}, {"order", 2}}})},
                    {"nodes_per_dim", 3}}}}});
    const json resolved = ffbs::resolve_config(user);
    const auto built = ffbs::build_scenario(resolved);

    CHECK(built.stack.model.order() == 2);
    CHECK(built.stack.estimators[1]->node_count() == 27);

    Eigen::VectorXd eta(2);
    eta << 0.7, 1.3;
    CHECK(built.stack.model.steps[1].F(eta, 0.0) == doctest::Approx(2.5 * 1.3));
    CHECK(built.stack.model.steps[1].F_bound(eta) == doctest::Approx(1.0 + 1.3 * 1.3));
    CHECK(built.stack.model.steps[0].F(eta.head(1), 0.3) == 0.0);

    // bound functions may not depend on time
    json bad = user;
    bad["plant"]["steps"][1]["f_bound"]["terms"][0]["trig"] =
        json{{"fn", "cos"}, {"arg", "t"}};
    CHECK(config_error_of([&] {
              (void)ffbs::build_scenario(ffbs::resolve_config(bad));
          }).find("bound") != std::string::npos);
}

TEST_CASE("config files load with errors mapped to ConfigError") {
    const fs::path dir = fresh_dir("cfg");

    spit(dir / "ok.json", R"({"dt": 2e-3, "t_final": 1.0})");
    const json loaded = ffbs::load_config_file((dir / "ok.json").string());
    CHECK(loaded.at("dt") == 2e-3);
    CHECK(loaded.at("t_final") == 1.0);

    CHECK_THROWS_AS((void)ffbs::load_config_file((dir / "missing.json").string()),
                    ffbs::ConfigError);

    spit(dir / "broken.json", "{\"dt\": ");
    CHECK_THROWS_AS((void)ffbs::load_config_file((dir / "broken.json").string()),
                    ffbs::ConfigError);
}

TEST_CASE("cli run writes trace and plots") {
    const fs::path dir = fresh_dir("cli_run");
    const std::string out = (dir / "out").string();

    CHECK(run_cli({"run", "--out-dir", out, "--t-final", "0.5", "--no-plots"}) == 0);
    CHECK(fs::exists(dir / "out" / "trace.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "tracking.svg"));

    CHECK(run_cli({"run", "--out-dir", out, "--t-final", "0.5"}) == 0);
    CHECK(fs::exists(dir / "out" / "tracking.svg"));
    CHECK(fs::exists(dir / "out" / "approx.svg"));
    CHECK(fs::exists(dir / "out" / "switch.svg"));

    const std::string csv = slurp(dir / "out" / "trace.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t,eta1,eta2,y_d,xi1,u,w2,p_hat2,e_F2,s_n2,delta1,delta2,omega_norm2");
    size_t rows = 0;
    for (std::string line; std::getline(lines, line);) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        REQUIRE(cells.size() == 13);
        for (const auto& cell : cells) CHECK_NOTHROW((void)std::stod(cell));
        ++rows;
    }
    CHECK(rows == 501);
    CHECK(csv.find('\r') == std::string::npos);

    const std::string svg = slurp(dir / "out" / "tracking.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("href") == std::string::npos);
}

TEST_CASE("cli runs are byte-deterministic") {
    const fs::path dir = fresh_dir("cli_det");
    const std::string a = (dir / "a").string();
    const std::string b = (dir / "b").string();
    REQUIRE(run_cli({"run", "--out-dir", a, "--t-final", "0.5"}) == 0);
    REQUIRE(run_cli({"run", "--out-dir", b, "--t-final", "0.5"}) == 0);
    CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
    CHECK(slurp(dir / "a" / "tracking.svg") == slurp(dir / "b" / "tracking.svg"));
    CHECK(slurp(dir / "a" / "approx.svg") == slurp(dir / "b" / "approx.svg"));
    CHECK(slurp(dir / "a" / "switch.svg") == slurp(dir / "b" / "switch.svg"));
}

TEST_CASE("cli compare emits one row per variant") {
    const fs::path dir = fresh_dir("cli_cmp");
    const std::string out = (dir / "out").string();

    CHECK(run_cli({"compare", "--out-dir", out, "--t-final", "0.5"}) == 0);
    const std::string csv = slurp(dir / "out" / "comparison.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "variant,status,rms_tracking,rms_approx_error,settle_time,switch_duty");
    std::vector<std::string> tags;
    for (std::string line; std::getline(lines, line);) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        REQUIRE(cells.size() == 6);
        CHECK(cells[1] == "ok");
        tags.push_back(cells[0]);
    }
    REQUIRE(tags.size() == 3);
    CHECK(tags[0] == "developed");
    CHECK(tags[1] == "developed-without-composite");
    CHECK(tags[2] == "fse-rbfnn-cfb");
}

TEST_CASE("cli exit codes") {
    const fs::path dir = fresh_dir("cli_codes");

    // invalid input is exit 2
    CHECK(run_cli({"verify", "--samples", "0"}) == 2);
    CHECK(run_cli({"run", "--config", (dir / "nope.json").string()}) == 2);
    CHECK(run_cli({"compare", "--variant", "developed", "--variant", "bogus",
                   "--t-final", "0.5", "--out-dir", (dir / "x").string()}) == 2);
    spit(dir / "bad.json", R"({"m_c": {"num": 1, "den": 2}})");
    CHECK(run_cli({"run", "--config", (dir / "bad.json").string(),
                   "--out-dir", (dir / "y").string()}) == 2);
    CHECK(run_cli({}) == 2);  // missing subcommand

    // verification pass/fail
    CHECK(run_cli({"verify", "--samples", "200"}) == 0);
    CHECK(run_cli({"verify", "--samples", "200", "--tolerance", "0"}) == 1);
}
