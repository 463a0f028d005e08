#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "equiloc/fit.hpp"
#include "equiloc/harness.hpp"

using namespace equiloc;
namespace fs = std::filesystem;

namespace {

fs::path scenario_dir() {
    const char* env = std::getenv("EQUILOC_SCENARIOS");
    return env ? fs::path(env) : fs::path("scenarios");
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("equiloc-test-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig load_into(const std::string& file, const fs::path& out) {
    fs::path path = scenario_dir() / file;
    if (!fs::exists(path)) throw std::runtime_error("missing scenario " + path.string());
    ScenarioConfig cfg = load_scenario(path.string());
    cfg.out_dir = out.string();
    return cfg;
}

std::string error_text(const std::string& text) {
    try {
        parse_scenario(text, "t.cfg");
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        return e.what();
    }
    ADD_FAILURE() << "expected a parse error for: " << text;
    return "";
}

}  // namespace

TEST(Harness, ParsesScenarioKeys) {
    auto cfg = parse_scenario(
        "# comment\n"
        "task = \"desing\"\n"
        "model.weights = [1, -1]\n"
        "amplitude = \"gauss(p) * bump(X, 1, 2)\"\n"
        "mu.log = [0.01, 0.2, 5]\n"
        "eta = \"1/2\"\n"
        "expect.alpha = [1.8, 2.2]\n",
        "t.cfg");
    EXPECT_EQ(cfg.task, "desing");
    EXPECT_EQ(cfg.weights, (IntMatrix{{1}, {-1}}));
    ASSERT_EQ(cfg.mus.size(), 5u);
    EXPECT_NEAR(cfg.mus.front(), 0.01, 1e-15);
    EXPECT_NEAR(cfg.mus.back(), 0.2, 1e-15);
    EXPECT_EQ(cfg.eta_for(1), (RationalVector{Rational(1, 2)}));
    ASSERT_TRUE(cfg.expect_alpha);
    EXPECT_EQ(cfg.expect_alpha->second, 2.2);
    EXPECT_EQ(cfg.where("eta"), "t.cfg:6:7");
}

TEST(Harness, ConfigErrorsPointAtTheSource) {
    EXPECT_NE(error_text("task = \"desing\"\nmodel.wieghts = [1, -1]\n").find("t.cfg:2:1"), std::string::npos);
    EXPECT_NE(error_text("task = \"desing\"\ntask = \"dh\"\n").find("t.cfg:2"), std::string::npos);
    EXPECT_NE(error_text("task = \"desing\"\nmodel.weights = [1, -1\n").find("t.cfg:2:"), std::string::npos);
    EXPECT_NE(error_text("task = \"desing\"\nmodel.weights\n").find("t.cfg:2"), std::string::npos);
    EXPECT_NE(error_text("task = \"dh\"\nfp[1].J = [1]\n").find("t.cfg"), std::string::npos);
    EXPECT_NE(error_text("task = \"desing\"\neta = \"1/0\"\n").find("t.cfg:2"), std::string::npos);
}

TEST(Harness, MuList) {
    EXPECT_EQ(parse_mu_list("0.1,0.05, 1e-3"), (std::vector<double>{0.1, 0.05, 1e-3}));
    EXPECT_THROW(parse_mu_list("0.1,abc"), Error);
    EXPECT_THROW(parse_mu_list(""), Error);
    EXPECT_THROW(parse_mu_list("0.1x"), Error);
}

TEST(Harness, OrderFitOnSyntheticResiduals) {
    std::vector<double> mu, pure, logged, flat;
    for (int i = 0; i < 8; ++i) {
        double m = 1e-3 * std::pow(100.0, i / 7.0);
        mu.push_back(m);
        pure.push_back(3 * m * m);
        logged.push_back(3 * m * m * std::log(1 / m));
        flat.push_back(0.25);
    }
    EXPECT_NEAR(fit_order(mu, pure, false).alpha, 2.0, 0.01);
    OrderFit lf = fit_order(mu, logged, true);
    EXPECT_GE(lf.alpha, 1.9);
    EXPECT_LE(lf.alpha, 2.1);
    EXPECT_GE(lf.beta, 0.5);
    EXPECT_LE(lf.beta, 1.5);
    EXPECT_NEAR(fit_order(mu, flat, false).alpha, 0.0, 1e-12);
    auto data_error = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind() == ErrorKind::data;
        }
        return false;
    };
    EXPECT_TRUE(data_error([&] { fit_order({0.1, 0.2, 0.3}, {1, 2, 3}, false); }));
    EXPECT_TRUE(data_error([&] { fit_order(mu, std::vector<double>(8, 0.0), false); }));
    EXPECT_TRUE(data_error([&] { fit_order({0.5, 1, 2, 4}, {1, 2, 3, 4}, true); }));
}

TEST(Harness, CsvAndMeasureRoundTrip) {
    CsvTable t{{"mu", "re", "note"}, {}};
    t.add({format_number(0.1), format_number(1.0 / 3), "ok"});
    t.add({format_number(1e-7), format_number(-2.5), ""});
    EXPECT_EQ(parse_csv(t.text()), t);
    EXPECT_THROW(t.add({"1"}), Error);
    EXPECT_THROW(parse_csv("mu,re\n1,2\n"), Error);
    EXPECT_EQ(std::stod(format_number(M_PI)), M_PI);

    auto sphere = dh_measure(sphere_fixed_points(), ConeLambda{{{Rational(1)}}});
    EXPECT_EQ(parse_measure(sphere.serialize()).serialize(), sphere.serialize());
    auto m2 = dh_measure(cut_fixed_points(LinearHamiltonianModel::from_weights({{1, 0}, {0, 1}, {-1, -1}}), 1),
                         ConeLambda{{{Rational(1), Rational(2)}}});
    auto back = parse_measure(m2.serialize());
    EXPECT_EQ(back.serialize(), m2.serialize());
    EXPECT_NEAR(back.density({-0.2, -0.1}), m2.density({-0.2, -0.1}), 1e-12);
}

TEST(Harness, SvgPlot) {
    std::string svg = svg_plot("t", "x", "y", {PlotSeries{"s", {0.01, 0.1, 1.0}, {1e-4, 1e-2, 1.0}}}, true, true);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
}

TEST(Harness, DesingRunIsDeterministic) {
    fs::path a = scratch("desing-a"), b = scratch("desing-b");
    RunManifest ma = run_scenario(load_into("desing_pair.cfg", a));
    RunManifest mb = run_scenario(load_into("desing_pair.cfg", b));
    EXPECT_TRUE(ma.all_pass()) << ma.text();
    EXPECT_EQ(ma.scenario_hash, mb.scenario_hash);
    EXPECT_EQ(slurp(a / "result.csv"), slurp(b / "result.csv"));
    EXPECT_EQ(slurp(a / "tree.txt"), slurp(b / "tree.txt"));
    for (const char* f : {"result.csv", "tree.txt", "residual.svg", "manifest.txt"}) EXPECT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(ma.value("kappa"), "1");
    EXPECT_EQ(ma.value("tree_depth"), "1");
    EXPECT_EQ(ma.value("lambda_a"), "1");
    EXPECT_NEAR(std::stod(ma.value("L0")), M_PI * M_PI, 1e-9);
    EXPECT_NE(slurp(a / "manifest.txt").find("summary = PASS"), std::string::npos);
    auto table = parse_csv(slurp(a / "result.csv"));
    EXPECT_EQ(table.rows.size(), 5u);
}

TEST(Harness, EmptyAmplitudeGivesZeros) {
    fs::path out = scratch("empty");
    RunManifest m = run_scenario(load_into("desing_empty.cfg", out));
    EXPECT_TRUE(m.all_pass());
    EXPECT_EQ(std::stod(m.value("L0")), 0.0);
    auto table = parse_csv(slurp(out / "result.csv"));
    ASSERT_FALSE(table.rows.empty());
    for (const auto& row : table.rows) {
        for (std::size_t k = 1; k < row.size(); ++k) {
            if (!row[k].empty() && std::isdigit(static_cast<unsigned char>(row[k].back()))) {
                EXPECT_EQ(std::stod(row[k]), 0.0) << table.columns[k];
            }
        }
    }
}

TEST(Harness, SphereMeasureTable) {
    fs::path out = scratch("dh");
    RunManifest m = run_scenario(load_into("dh_sphere.cfg", out));
    EXPECT_TRUE(m.all_pass()) << m.text();
    EXPECT_EQ(m.value("two_pi_power"), "1");
    std::string text = slurp(out / "measure.txt");
    auto u = parse_measure(text);
    EXPECT_NEAR(u.density({0.0}), 2 * M_PI, 1e-12);
    EXPECT_TRUE(fs::exists(out / "density.svg"));
    EXPECT_NE(slurp(out / "result.csv").find("-1,1,1"), std::string::npos);
}

TEST(Harness, ResidueAndWeylScenarios) {
    for (const char* f : {"residue_pair.cfg", "residue_rank2.cfg", "residue_sphere.cfg", "weyl_su2.cfg", "check_pair.cfg", "dh_rank2.cfg"}) {
        RunManifest m = run_scenario(load_into(f, scratch(std::string("s-") + f)));
        EXPECT_TRUE(m.all_pass()) << f << "\n" << m.text();
    }
}

TEST(Harness, TaskErrorsCarryContext) {
    auto cfg = parse_scenario("task = \"desing\"\nmodel.weights = [1, 1]\namplitude = \"gauss(p) * bump(X, 1, 2)\"\nmu = [0.1, 0.05]\n", "bad.cfg");
    cfg.out_dir = scratch("bad").string();
    try {
        run_scenario(cfg);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("bad.cfg"), std::string::npos);
    }
}
