#include "pfl/config.hpp"

#include "pfl/errors.hpp"
#include "pfl/io.hpp"

#include <sstream>

namespace pfl {

namespace {

template <class F>
auto guarded(const char* what, F&& f)
{
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config ") + what + ": " + e.what());
    }
}

} // namespace

Json default_config()
{
    return guarded("defaults", [] { return Json::parse(default_config_text()); });
}

Json load_config(const std::filesystem::path& path)
{
    Json cfg = default_config();
    Json patch;
    try {
        patch = Json::parse(io::read_file(path));
    } catch (const Json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!patch.is_object())
        throw ConfigError(path.string() + ": top level must be an object");
    cfg.merge_patch(patch);
    return cfg;
}

void override_field(Json& cfg, const std::string& dotted, const Json& value)
{
    Json* node = &cfg;
    std::istringstream ss(dotted);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(ss, key, '.'))
        keys.push_back(key);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (!node->is_object() || !node->contains(keys[i]))
            throw ConfigError("unknown config field '" + dotted + "'");
        node = &(*node)[keys[i]];
    }
    *node = value;
}

std::string config_hash(const Json& cfg) { return io::sha256_hex(cfg.dump()); }

CaseConfig case_config(const Json& cfg, int case_id)
{
    return guarded("case", [&] {
        CaseConfig c;
        const Json& m = cfg.at("material");
        c.material.E = m.at("E");
        c.material.nu = m.at("nu");
        c.material.rho = m.at("rho");
        c.material.b = m.at("b");
        c.material.a = m.at("a");
        c.material.sigma_exp = m.at("sigma_exp");
        c.material.delta = m.at("delta");
        c.material.h = m.at("h");

        bool found = false;
        for (const Json& row : cfg.at("cases")) {
            if (row.at("id").get<int>() != case_id)
                continue;
            c.material.gamma = row.at("gamma");
            c.material.gc = row.at("gc");
            c.material.c = row.at("c");
            found = true;
        }
        if (!found)
            throw ConfigError("unknown case " + std::to_string(case_id) + " (expected 1-6)");
        c.case_id = case_id;

        c.dt = cfg.at("loading").at("dt");
        c.pull_rate = cfg.at("loading").at("pull_rate");
        c.gamma_tilde = cfg.at("newmark").at("gamma_tilde");
        c.beta_tilde = cfg.at("newmark").at("beta_tilde");
        const Json& s = cfg.at("stop");
        c.stop.phi_threshold = s.at("phi_threshold");
        c.stop.consecutive_steps = s.at("consecutive_steps");
        c.stop.force_drop_fraction = s.at("force_drop_fraction");
        c.stop.t_max = s.at("t_max");
        const Json& sv = cfg.at("solver");
        const std::string kind = sv.at("kind");
        if (kind == "direct")
            c.solver.kind = LinearSolverKind::Direct;
        else if (kind == "cg")
            c.solver.kind = LinearSolverKind::ConjugateGradient;
        else
            throw ConfigError("solver.kind must be 'direct' or 'cg'");
        c.solver.cg_tolerance = sv.at("cg_tolerance");
        c.solver.cg_max_iterations = sv.at("cg_max_iterations");
        c.solver.lumping.damage = sv.at("lumped_damage_mass");
        c.solver.lumping.fatigue = sv.at("lumped_fatigue_mass");
        c.material.validate();
        c.validate();
        return c;
    });
}

SpecimenParams specimen_params(const Json& cfg)
{
    return guarded("specimen", [&] {
        const Json& s = cfg.at("specimen");
        SpecimenParams p;
        p.gauge_length = s.at("gauge_length");
        p.gauge_width = s.at("gauge_width");
        p.grip_width = s.at("grip_width");
        p.fillet_radius = s.at("fillet_radius");
        p.total_length = s.at("total_length");
        p.thickness = cfg.at("material").at("h");
        p.validate();
        return p;
    });
}

double mesh_target_edge(const Json& cfg, bool desk)
{
    return guarded("mesh", [&] {
        const double h = cfg.at("mesh").at(desk ? "desk_target_edge" : "target_edge");
        if (!(h > 0.0))
            throw ConfigError("mesh target edge must be positive");
        return h;
    });
}

SensorGrid sensor_grid(const Json& cfg)
{
    return guarded("sensors", [&] {
        return default_sensor_grid(specimen_params(cfg), cfg.at("sensors").at("columns"), cfg.at("sensors").at("rows"));
    });
}

LabelSettings label_settings(const Json& cfg)
{
    return guarded("labels", [&] {
        const Json& l = cfg.at("labels");
        LabelSettings s;
        s.smoothing_window = l.at("smoothing_window");
        const Json& r = l.at("multi4_thresholds");
        if (!r.is_array() || r.size() != 3)
            throw ConfigError("labels.multi4_thresholds needs three values");
        s.multi4_r1 = r[0];
        s.multi4_r2 = r[1];
        s.multi4_r3 = r[2];
        return s;
    });
}

SplitSpec split_spec(const Json& cfg, std::uint64_t seed)
{
    return guarded("classify", [&] {
        const Json& c = cfg.at("classify");
        SplitSpec s;
        s.comb = c.at("comb");
        s.val_fraction_within = c.at("val_fraction_within");
        s.stratified = c.at("stratified");
        s.seed = seed;
        s.validate();
        return s;
    });
}

AnnSettings ann_settings(const Json& cfg)
{
    return guarded("classify", [&] {
        const Json& c = cfg.at("classify");
        AnnSettings a;
        a.hidden = c.at("ann_hidden");
        a.learning_rate = c.at("ann_learning_rate");
        a.batch_size = c.at("ann_batch_size");
        a.max_epochs = c.at("ann_max_epochs");
        a.patience = c.at("ann_patience");
        a.minmax_scaling = c.at("ann_minmax_scaling");
        return a;
    });
}

UqSpec uq_spec(const Json& cfg, std::uint64_t seed)
{
    return guarded("uq", [&] {
        UqSpec u;
        u.runs = cfg.at("uq").at("runs");
        u.noise_stds = cfg.at("uq").at("noise_stds").get<std::vector<double>>();
        u.base_seed = seed;
        u.split = split_spec(cfg, seed);
        u.knn_k = cfg.at("classify").at("knn_k");
        u.knn_metric = parse_metric(cfg.at("classify").at("knn_metric"));
        u.ann = ann_settings(cfg);
        u.validate();
        return u;
    });
}

} // namespace pfl
