#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "monoreg/error.hpp"
#include "monoreg/experiment.hpp"

using namespace monoreg;

namespace {

SweepConfig small_estimation() {
    SweepConfig cfg = SweepConfig::estimation_defaults();
    cfg.functions = {FunctionId::f1, FunctionId::f6};
    cfg.sample_sizes = {100};
    cfg.datasets = 3;
    cfg.estimate.m_draws = 40;
    cfg.threads = 1;
    return cfg;
}

std::string table(const ExperimentReport& r) {
    std::ostringstream out;
    write_table_csv(out, r);
    return out.str();
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("defaults") {
    const auto e = SweepConfig::estimation_defaults();
    CHECK(e.functions.size() == 6);
    CHECK(e.datasets == 20);
    CHECK(e.methods == std::vector<std::string>{"BP", "LS"});
    const auto t = SweepConfig::testing_defaults();
    CHECK(t.functions.size() == 12);
    CHECK(t.datasets == 200);
    CHECK(t.kind == ExperimentKind::Testing);
}

TEST_CASE("sweep config JSON") {
    const auto j = nlohmann::json::parse(R"({"kind": "testing", "functions": ["f7", "f11"],
        "sample_sizes": [200], "methods": ["BP", "LR"], "datasets": 4, "base_seed": 9,
        "m_draws": 30, "gamma": 0.4, "prior": {"beta1": 2}})");
    const auto cfg = sweep_from_json(j);
    CHECK(cfg.kind == ExperimentKind::Testing);
    CHECK(cfg.functions == std::vector<FunctionId>{FunctionId::f7, FunctionId::f11});
    CHECK(cfg.test.m_draws == 30);
    CHECK(cfg.test.gamma == 0.4);
    CHECK(cfg.prior.beta1 == 2.0);
    CHECK(sweep_from_json(to_json(cfg)).datasets == 4);
    CHECK_THROWS_AS(sweep_from_json(nlohmann::json{{"datasetz", 3}}), ConfigError);
    auto bad = cfg;
    bad.methods = {"LS"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("estimation sweep is reproducible and thread independent") {
    auto cfg = small_estimation();
    const auto a = run_experiment(cfg);
    cfg.threads = 3;
    const auto b = run_experiment(cfg);
    REQUIRE(a.cells.size() == 4);
    CHECK(to_json(a) == to_json(b));
    CHECK(table(a) == table(b));
    for (const auto& c : a.cells) {
        CHECK(c.values.size() == 3);
        CHECK(c.failures == 0);
        CHECK(c.mean > 0.0);
        CHECK(c.mean < 0.2);
    }
}

TEST_CASE("single-cell sweep produces one table row") {
    auto cfg = small_estimation();
    cfg.functions = {FunctionId::f2};
    cfg.methods = {"BP"};
    const auto r = run_experiment(cfg);
    const auto text = table(r);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.rfind("function,n100_BP\n", 0) == 0);
    std::ostringstream longform;
    write_long_csv(longform, r);
    CHECK(longform.str().rfind("kind,function,n,method,mean,sd,datasets,failures,error\n", 0) == 0);
    std::ostringstream svg;
    write_svg_plot(svg, r);
    CHECK(svg.str().find("<svg") != std::string::npos);
}

TEST_CASE("testing sweep reports rejection percentages") {
    SweepConfig cfg = SweepConfig::testing_defaults();
    cfg.functions = {FunctionId::f11};
    cfg.sample_sizes = {200};
    cfg.methods = {"BP", "BPA", "LR", "PL"};
    cfg.datasets = 4;
    cfg.test.m_draws = 30;
    const auto r = run_experiment(cfg);
    REQUIRE(r.cells.size() == 4);
    for (const auto& c : r.cells) {
        CHECK(c.mean == 100.0);
        CHECK(c.sd == 0.0);
    }
}

TEST_CASE("finished cells are reused from the cell directory") {
    const auto dir = std::filesystem::temp_directory_path() / "monoreg_cells_test";
    std::filesystem::remove_all(dir);
    auto cfg = small_estimation();
    cfg.cell_dir = dir;
    const auto first = run_experiment(cfg);
    const auto second = run_experiment(cfg);
    for (std::size_t i = 0; i < first.cells.size(); ++i) {
        CHECK_FALSE(first.cells[i].resumed);
        CHECK(second.cells[i].resumed);
        CHECK(second.cells[i].values == first.cells[i].values);
    }
    cfg.base_seed = 2;
    const auto third = run_experiment(cfg);
    CHECK_FALSE(third.cells[0].resumed);
    CHECK(third.cells[0].values != first.cells[0].values);
    std::filesystem::remove_all(dir);
}

}
