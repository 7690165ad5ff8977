#include "pfl/config.hpp"
#include "pfl/errors.hpp"
#include "pfl/io.hpp"

#include "support.hpp"

using namespace pfl;

TEST_CASE("shipped case table")
{
    const Json cfg = default_config();
    const double gamma[] = {3e-4, 2e-3, 5e-4, 5e-4, 2e-3, 2.5e-4};
    const double gc[] = {2700, 2700, 5400, 10800, 5400, 5400};
    const double c[] = {2e-6, 2e-6, 2e-6, 2e-6, 1e-6, 1e-6};
    for (int id = 1; id <= 6; ++id) {
        const CaseConfig cc = case_config(cfg, id);
        CHECK(cc.material.gamma == gamma[id - 1]);
        CHECK(cc.material.gc == gc[id - 1]);
        CHECK(cc.material.c == c[id - 1]);
        CHECK(cc.material.E == 160e9);
        CHECK(cc.material.rho == 7800.0);
        CHECK(cc.material.b == 1e8);
        CHECK(cc.material.a == 5e-7);
        CHECK(cc.material.h == 5e-3);
        CHECK(cc.dt == 5e-4);
        CHECK(cc.pull_rate == 4.5e-4);
        CHECK(cc.gamma_tilde == 0.5);
        CHECK(cc.beta_tilde == 0.25);
    }
    CHECK_THROWS_AS(case_config(cfg, 7), ConfigError);
    CHECK_THROWS_AS(case_config(cfg, 0), ConfigError);
}

TEST_CASE("typed sections")
{
    const Json cfg = default_config();
    const SplitSpec s = split_spec(cfg, 5);
    CHECK(s.comb == 2);
    CHECK(s.seed == 5);
    const AnnSettings a = ann_settings(cfg);
    CHECK(a.hidden == 5);
    CHECK(a.learning_rate == 0.5);
    CHECK(a.batch_size == 32);
    CHECK(a.max_epochs == 2000);
    CHECK(a.patience == 200);
    const LabelSettings l = label_settings(cfg);
    CHECK(l.multi4_r2 == 0.92);
    CHECK(l.multi4_r3 == 0.85);
    const UqSpec u = uq_spec(cfg, 1);
    CHECK(u.runs == 1000);
    CHECK(u.knn_k == 2);
    CHECK(u.knn_metric == Metric::Cosine);
    CHECK(mesh_target_edge(cfg, true) > mesh_target_edge(cfg, false));
    CHECK(sensor_grid(cfg).points.size() == 29 * 5);
}

TEST_CASE("overrides and partial files")
{
    Json cfg = default_config();
    override_field(cfg, "stop.t_max", 0.5);
    CHECK(case_config(cfg, 1).stop.t_max == 0.5);
    CHECK_THROWS_AS(override_field(cfg, "stop.t_maximum", 1.0), ConfigError);
    CHECK_THROWS_AS(override_field(cfg, "nothing.here", 1.0), ConfigError);

    const std::string h0 = config_hash(default_config());
    CHECK(config_hash(cfg) != h0);
    CHECK(config_hash(default_config()) == h0);

    test::TempDir dir("cfg");
    io::write_file_atomic(dir / "p.json", R"({"loading": {"dt": 1e-3}})");
    const Json merged = load_config(dir / "p.json");
    CHECK(case_config(merged, 2).dt == 1e-3);
    CHECK(case_config(merged, 2).pull_rate == 4.5e-4);

    io::write_file_atomic(dir / "bad.json", "{not json");
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    io::write_file_atomic(dir / "arr.json", "[1, 2]");
    CHECK_THROWS_AS(load_config(dir / "arr.json"), ConfigError);

    Json broken = default_config();
    broken["material"]["nu"] = 0.7;
    CHECK_THROWS_AS(case_config(broken, 1), ConfigError);
    broken = default_config();
    broken["solver"]["kind"] = "gmres";
    CHECK_THROWS_AS(case_config(broken, 1), ConfigError);
    broken = default_config();
    broken["labels"]["multi4_thresholds"] = {1.0, 0.9};
    CHECK_THROWS_AS(label_settings(broken), ConfigError);
    broken = default_config();
    broken["material"].erase("E");
    CHECK_THROWS_AS(case_config(broken, 1), ConfigError);
}
