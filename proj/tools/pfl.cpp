// Command-line driver: simulate, label, train-eval, uq, report.

#include "pfl/classify.hpp"
#include "pfl/config.hpp"
#include "pfl/dataset.hpp"
#include "pfl/errors.hpp"
#include "pfl/io.hpp"
#include "pfl/labeling.hpp"
#include "pfl/rng.hpp"
#include "pfl/sensing.hpp"
#include "pfl/timestepper.hpp"
#include "pfl/uq.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace pfl;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
};

Json resolve_config(const Common& c)
{
    Json cfg = c.config_path.empty() ? default_config() : load_config(c.config_path);
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq), text = kv.substr(eq + 1);
        Json value;
        try {
            value = Json::parse(text);
        } catch (const Json::exception&) {
            value = text;
        }
        override_field(cfg, key, value);
    }
    return cfg;
}

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config_path, "JSON file merged onto the built-in configuration")
        ->check(CLI::ExistingFile);
    app->add_option("--set", c.overrides, "Override a configuration field, e.g. stop.t_max=1.0");
    app->add_option("--seed", c.seed, "Seed for all randomness");
}

class Manifest {
public:
    Manifest(std::string command, int argc, char** argv) : command_(std::move(command)), start_(clock::now())
    {
        for (int i = 1; i < argc; ++i)
            args_.push_back(argv[i]);
    }
    void input(const fs::path& p) { inputs_.push_back(p); }
    void output(const fs::path& p) { outputs_.push_back(p); }
    Json& extra() { return extra_; }

    void write(const fs::path& dir, const Json& cfg, std::uint64_t seed)
    {
        Json m;
        m["command"] = command_;
        m["args"] = args_;
        m["config_hash"] = config_hash(cfg);
        m["seed"] = seed;
        m["wall_time_s"] = std::chrono::duration<double>(clock::now() - start_).count();
        auto listing = [](const std::vector<fs::path>& paths) {
            Json arr = Json::array();
            for (const auto& p : paths)
                arr.push_back(Json{{"path", p.string()}, {"sha256", io::sha256_file(p)}});
            return arr;
        };
        m["inputs"] = listing(inputs_);
        m["outputs"] = listing(outputs_);
        if (!extra_.is_null())
            m["details"] = extra_;
        io::write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
    }

private:
    using clock = std::chrono::steady_clock;
    std::string command_;
    std::vector<std::string> args_;
    clock::time_point start_;
    std::vector<fs::path> inputs_, outputs_;
    Json extra_;
};

void write_json(const fs::path& path, const Json& j, Manifest& manifest)
{
    io::write_file_atomic(path, j.dump(2) + "\n");
    manifest.output(path);
}

Json sensors_json(const Mesh& mesh, const SensorSet& sensors, const SpecimenParams& sp)
{
    Json j;
    j["layout"] = sensors.layout_descriptor;
    j["node_ids"] = sensors.node_ids;
    Json xy = Json::array();
    for (int id : sensors.node_ids)
        xy.push_back(Json::array({mesh.nodes[static_cast<std::size_t>(id)].x, mesh.nodes[static_cast<std::size_t>(id)].y}));
    j["coordinates"] = xy;
    const double xf = 0.5 * sp.gauge_length + 0.25 * sp.transition_length();
    const Point2 fillet{xf, -0.8 * sp.half_width(xf)};
    j["highlight"] = {{"mid", sensors.node_ids[nearest_sensor(mesh, sensors, {0.0, 0.0})]},
                      {"fillet", sensors.node_ids[nearest_sensor(mesh, sensors, fillet)]}};
    return j;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    Common common;
    int case_id = 0;
    std::string mesh_path;
    bool desk = false;
    std::optional<double> target_edge, dt, t_max;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, Manifest& manifest)
{
    Json cfg = resolve_config(a.common);
    int case_id = a.case_id;
    if (case_id == 0 && cfg.contains("case"))
        case_id = cfg["case"].get<int>();
    if (case_id < 1 || case_id > 6)
        throw ConfigError("--case must be 1-6");
    if (a.dt)
        cfg["loading"]["dt"] = *a.dt;
    if (a.t_max)
        cfg["stop"]["t_max"] = *a.t_max;
    const CaseConfig cc = case_config(cfg, case_id);
    const SpecimenParams sp = specimen_params(cfg);

    Mesh mesh;
    if (!a.mesh_path.empty()) {
        mesh = read_mesh_file(a.mesh_path);
        manifest.input(a.mesh_path);
    } else {
        mesh = build_specimen(sp, a.target_edge ? *a.target_edge : mesh_target_edge(cfg, a.desk));
    }
    const SensorSet sensors = select_sensors(mesh, sensor_grid(cfg));

    std::cerr << "case " << case_id << ": " << mesh.num_nodes() << " nodes, " << mesh.num_elements() << " elements, "
              << sensors.node_ids.size() << " sensors\n";
    const SimulationRecord rec = run_case(cc, mesh, sensors.node_ids);

    const fs::path out(a.out);
    const SensorSeries series = series_from_record(rec);
    write_series_csv(out / "series.csv", series);
    manifest.output(out / "series.csv");
    write_patterns_csv(out / "patterns.csv", extract_patterns(series));
    manifest.output(out / "patterns.csv");
    const LoadCurve curve = compute_load_curve(rec);
    write_curve_csv(out / "curve.csv", curve);
    manifest.output(out / "curve.csv");
    write_json(out / "sensors.json", sensors_json(mesh, sensors, sp), manifest);

    std::ostringstream field;
    const std::vector<double> phi(rec.final_state.phi.data(), rec.final_state.phi.data() + rec.final_state.phi.size());
    write_mesh_with_field(field, mesh, phi, "phi");
    io::write_file_atomic(out / "final_phi.mesh", field.str());
    manifest.output(out / "final_phi.mesh");

    std::size_t peak = 0;
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (curve.f[i] > curve.f[peak])
            peak = i;
    Eigen::Index imax = 0;
    rec.final_state.phi.maxCoeff(&imax);
    Json summary;
    summary["case_id"] = case_id;
    summary["nodes"] = mesh.num_nodes();
    summary["elements"] = mesh.num_elements();
    summary["min_edge"] = mesh.min_edge;
    summary["steps"] = rec.num_steps();
    summary["stop_reason"] = rec.stop_reason;
    summary["failure_time"] = std::isnan(rec.failure_time) ? Json(nullptr) : Json(rec.failure_time);
    summary["peak_force"] = curve.f[peak];
    summary["peak_time"] = curve.t[peak];
    summary["max_phi_location"] = {mesh.nodes[static_cast<std::size_t>(imax)].x, mesh.nodes[static_cast<std::size_t>(imax)].y};
    write_json(out / "summary.json", summary, manifest);
    manifest.write(out, cfg, a.common.seed);
    std::cout << "case " << case_id << ": stop '" << rec.stop_reason << "' after " << rec.num_steps() << " steps, failure time "
              << rec.failure_time << " s\n";
    return 0;
}

// ---------------------------------------------------------------- label

struct LabelArgs {
    Common common;
    std::vector<std::string> series, curves;
    std::vector<int> case_ids;
    std::string scheme;
    std::string out;
};

int cmd_label(const LabelArgs& a, Manifest& manifest)
{
    const Json cfg = resolve_config(a.common);
    const LabelSettings ls = label_settings(cfg);
    double fraction = 0.0;
    const LabelScheme scheme = parse_scheme(a.scheme, &fraction);

    if (a.series.size() != a.curves.size())
        throw ConfigError("give one --curve per --series");
    std::vector<CaseRun> runs;
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        runs.push_back({0, read_series_csv(a.series[i]), read_curve_csv(a.curves[i])});
        manifest.input(a.series[i]);
        manifest.input(a.curves[i]);
    }

    LabelVector lv;
    std::vector<double> times;
    if (scheme == LabelScheme::Location9) {
        if (a.case_ids.size() != runs.size())
            throw ConfigError("location9 needs --case-ids with one id per --series");
        const std::string per_case = cfg.at("labels").at("location_scheme");
        for (std::size_t i = 0; i < runs.size(); ++i)
            runs[i].case_id = a.case_ids[i];
        const Dataset d = location_dataset(runs, parse_scheme(per_case, nullptr), ls);
        lv.scheme = LabelScheme::Location9;
        lv.labels = d.labels;
        lv.class_domain = d.class_domain;
        times = d.times;
    } else {
        if (runs.size() != 1)
            throw ConfigError(a.scheme + " labels one run; give exactly one --series and --curve");
        const CaseRun& r = runs.front();
        if (r.curve.size() != r.series.times.size())
            throw DataError("series and curve row counts differ");
        times = r.series.times;
        switch (scheme) {
        case LabelScheme::Bin1: lv = label_binary(r.curve, BinaryCriterion::PeakForce, 0.0, ls); break;
        case LabelScheme::Bin2: lv = label_binary(r.curve, BinaryCriterion::MinSlope, 0.0, ls); break;
        case LabelScheme::Bin3: lv = label_binary(r.curve, BinaryCriterion::ForceFraction, fraction, ls); break;
        default: lv = case_labels(r.series, r.curve, scheme, ls); break;
        }
    }
    const fs::path out(a.out);
    write_labels(out, times, lv, ls);
    manifest.output(out);
    fs::path side = out;
    manifest.output(side.replace_extension(".json"));
    manifest.write(out.has_parent_path() ? out.parent_path() : fs::path("."), cfg, a.common.seed);
    std::cout << scheme_name(lv.scheme, lv.fraction) << ": " << lv.labels.size() << " rows\n";
    return 0;
}

// ---------------------------------------------------------------- shared data loading

struct LoadedData {
    RowMatrix phi;
    std::vector<int> labels;
    std::vector<int> class_domain;
};

LoadedData load_labeled(const std::vector<std::string>& series_paths, const std::string& labels_path, Manifest& manifest)
{
    std::vector<SensorSeries> parts;
    Eigen::Index rows = 0;
    for (const auto& p : series_paths) {
        parts.push_back(read_series_csv(p));
        manifest.input(p);
        if (parts.back().sensor_ids != parts.front().sensor_ids)
            throw DataError(p + ": sensor columns differ from " + series_paths.front());
        rows += parts.back().phi.rows();
    }
    LoadedData d;
    d.phi.resize(rows, parts.front().phi.cols());
    std::vector<double> times;
    Eigen::Index at = 0;
    for (const auto& s : parts) {
        d.phi.middleRows(at, s.phi.rows()) = s.phi;
        times.insert(times.end(), s.times.begin(), s.times.end());
        at += s.phi.rows();
    }
    auto [lt, lab] = read_labels_csv(labels_path);
    manifest.input(labels_path);
    if (lab.size() != times.size())
        throw DataError(labels_path + " has " + std::to_string(lab.size()) + " rows, series have " + std::to_string(times.size()));
    for (std::size_t i = 0; i < lt.size(); ++i)
        if (std::abs(lt[i] - times[i]) > 1e-9 * std::max(1.0, std::abs(times[i])))
            throw DataError(labels_path + ": time at row " + std::to_string(i + 1) + " does not match the series");
    d.labels = std::move(lab);
    d.class_domain = d.labels;
    std::sort(d.class_domain.begin(), d.class_domain.end());
    d.class_domain.erase(std::unique(d.class_domain.begin(), d.class_domain.end()), d.class_domain.end());
    return d;
}

Json index_list(const std::vector<std::size_t>& v) { return Json(v); }

// ---------------------------------------------------------------- train-eval

struct TrainArgs {
    Common common;
    std::string model = "knn";
    std::optional<int> comb, k;
    std::string task = "presence";
    std::vector<std::string> series;
    std::string labels;
    std::string out;
};

int cmd_train_eval(const TrainArgs& a, Manifest& manifest)
{
    Json cfg = resolve_config(a.common);
    if (a.comb)
        cfg["classify"]["comb"] = *a.comb;
    if (a.k)
        cfg["classify"]["knn_k"] = *a.k;
    const SplitSpec ss = split_spec(cfg, derive_seed(a.common.seed, 0));
    const LoadedData d = load_labeled(a.series, a.labels, manifest);
    const RowMatrix X = features_from_phi(d.phi);
    const Split s = split(d.labels, ss);
    const RowMatrix Xtest = take_rows(X, s.test);
    const std::vector<int> ytest = take(d.labels, s.test);

    Json model;
    model["task"] = a.task;
    model["split"] = {{"comb", ss.comb}, {"seed", ss.seed}, {"val_fraction_within", ss.val_fraction_within},
                      {"stratified", ss.stratified}, {"train", index_list(s.train)}, {"val", index_list(s.val)},
                      {"test", index_list(s.test)}};
    Json inputs = Json::array();
    for (const auto& p : a.series)
        inputs.push_back(Json{{"path", p}, {"sha256", io::sha256_file(p)}});
    std::vector<int> pred;
    if (a.model == "knn") {
        const int k = cfg.at("classify").at("knn_k");
        const Metric metric = parse_metric(cfg.at("classify").at("knn_metric"));
        std::vector<std::size_t> tv = s.train;
        tv.insert(tv.end(), s.val.begin(), s.val.end());
        std::sort(tv.begin(), tv.end());
        const RowMatrix Xtv = take_rows(X, tv);
        const std::vector<int> ytv = take(d.labels, tv);
        std::vector<int> ks;
        for (int i = 1; i <= 10; ++i)
            ks.push_back(i);
        const int folds = cfg.at("classify").at("knn_cv_folds");
        const auto cv = knn_cross_validate(Xtv, ytv, ks, folds, metric, derive_seed(a.common.seed, 1));
        const KnnModel m = knn_fit(Xtv, ytv, k, metric);
        pred = knn_predict_batch(m, Xtest);
        model["type"] = "knn";
        model["k"] = k;
        model["metric"] = metric_name(metric);
        model["n_features"] = X.cols();
        model["training_data"] = {{"series", inputs}, {"labels", a.labels}, {"rows", index_list(tv)}};
        Json cvj = Json::array();
        for (std::size_t i = 0; i < ks.size(); ++i)
            cvj.push_back(Json{{"k", ks[i]}, {"accuracy", cv[i]}});
        model["cross_validation"] = cvj;
    } else if (a.model == "ann") {
        const AnnSettings as = ann_settings(cfg);
        const AnnModel m = ann_train(take_rows(X, s.train), take(d.labels, s.train), take_rows(X, s.val),
                                     take(d.labels, s.val), d.class_domain, as, derive_seed(a.common.seed, 2));
        pred = ann_predict_batch(m, Xtest);
        auto flat = [](const Eigen::MatrixXd& W) {
            std::vector<double> v;
            for (Eigen::Index i = 0; i < W.rows(); ++i)
                for (Eigen::Index j = 0; j < W.cols(); ++j)
                    v.push_back(W(i, j));
            return v;
        };
        model["type"] = "ann";
        model["layer_sizes"] = m.layer_sizes();
        model["activation"] = "sigmoid";
        model["class_domain"] = m.class_domain;
        model["W1"] = flat(m.W1);
        model["b1"] = std::vector<double>(m.b1.data(), m.b1.data() + m.b1.size());
        model["W2"] = flat(m.W2);
        model["b2"] = std::vector<double>(m.b2.data(), m.b2.data() + m.b2.size());
        model["input_shift"] = std::vector<double>(m.x_shift.data(), m.x_shift.data() + m.x_shift.size());
        model["input_gain"] = std::vector<double>(m.x_gain.data(), m.x_gain.data() + m.x_gain.size());
        model["training"] = {{"learning_rate", as.learning_rate}, {"batch_size", as.batch_size},
                             {"max_epochs", as.max_epochs}, {"patience", as.patience}, {"minmax_scaling", as.minmax_scaling},
                             {"epochs_run", m.epochs_run}, {"best_val_accuracy", m.best_val_accuracy}};
        model["training_data"] = {{"series", inputs}, {"labels", a.labels}};
    } else {
        throw ConfigError("--model must be knn or ann");
    }

    const ConfusionMatrix cm = confusion(pred, ytest, d.class_domain);
    Json cj;
    cj["task"] = a.task;
    cj["model"] = a.model;
    cj["class_domain"] = cm.class_domain;
    cj["counts"] = cm.counts;
    Json recall = Json::array();
    for (std::size_t i = 0; i < cm.class_domain.size(); ++i) {
        const double r = cm.recall(i);
        recall.push_back(std::isnan(r) ? Json(nullptr) : Json(r));
    }
    cj["recall"] = recall;
    cj["total_accuracy"] = cm.total_accuracy();
    cj["test_rows"] = cm.total();

    const fs::path out(a.out);
    write_json(out / "confusion.json", cj, manifest);
    write_json(out / "model.json", model, manifest);
    manifest.write(out, cfg, a.common.seed);
    std::cout << a.model << " " << a.task << ": total accuracy " << cm.total_accuracy() << " on " << cm.total()
              << " test rows\n";
    return 0;
}

// ---------------------------------------------------------------- uq

struct UqArgs {
    Common common;
    std::optional<int> runs, threads;
    std::vector<double> noise;
    std::vector<std::string> algorithms;
    std::string task = "presence";
    std::vector<std::string> series;
    std::string labels;
    std::string out;
};

int cmd_uq(const UqArgs& a, Manifest& manifest)
{
    Json cfg = resolve_config(a.common);
    if (a.runs)
        cfg["uq"]["runs"] = *a.runs;
    if (!a.noise.empty())
        cfg["uq"]["noise_stds"] = a.noise;
    UqSpec spec = uq_spec(cfg, a.common.seed);
    if (!a.algorithms.empty()) {
        spec.algorithms.clear();
        for (const auto& s : a.algorithms)
            spec.algorithms.push_back(parse_algorithm(s));
    }
    if (a.threads)
        spec.threads = *a.threads;
    const LoadedData d = load_labeled(a.series, a.labels, manifest);
    const UqResult r = mc_accuracy(spec, d.phi, d.labels);
    const fs::path out(a.out);
    write_uq_report(out / "uq_report.csv", r);
    manifest.output(out / "uq_report.csv");
    write_uq_raw(out / "uq_raw.csv", r);
    manifest.output(out / "uq_raw.csv");
    manifest.extra() = {{"task", a.task}};
    manifest.write(out, cfg, a.common.seed);
    for (const auto& c : r.cells)
        std::cout << algorithm_name(c.algorithm) << " noise " << c.noise_std << ": mean " << c.mean << " std " << c.std
                  << " (" << c.runs << " runs)\n";
    return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
    Common common;
    std::string in, out;
};

const char* kPlotScript = R"py(# Plots the CSV files written next to this script.
import csv
import glob
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


for path in sorted(glob.glob(os.path.join(here, "*_sensors.csv"))):
    header, rows = read(path)
    t = [r[0] for r in rows]
    fig, ax = plt.subplots()
    for j, name in enumerate(header[1:3], start=1):
        ax.plot(t, [r[j] for r in rows], label=name)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("g(phi)")
    ax.legend()
    fig.savefig(path.replace(".csv", ".png"), dpi=150)

for path in sorted(glob.glob(os.path.join(here, "*_curve.csv"))):
    header, rows = read(path)
    fig, ax = plt.subplots()
    ax.plot([r[1] * 1e3 for r in rows], [r[2] * 1e-3 for r in rows])
    ax.set_xlabel("u [mm]")
    ax.set_ylabel("f [kN]")
    fig.savefig(path.replace(".csv", ".png"), dpi=150)

path = os.path.join(here, "accuracy_vs_noise.csv")
if os.path.exists(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    fig, ax = plt.subplots()
    for alg in sorted({r["algorithm"] for r in rows}):
        sel = [r for r in rows if r["algorithm"] == alg]
        ax.errorbar([float(r["noise_std"]) for r in sel], [float(r["mean_acc"]) for r in sel],
                    yerr=[float(r["std_acc"]) for r in sel], label=alg, marker="o")
    ax.set_xlabel("noise std on phi")
    ax.set_ylabel("total accuracy")
    ax.legend()
    fig.savefig(path.replace(".csv", ".png"), dpi=150)
)py";

int cmd_report(const ReportArgs& a, Manifest& manifest)
{
    const Json cfg = resolve_config(a.common);
    const fs::path in(a.in), out(a.out);
    if (!fs::is_directory(in))
        throw ConfigError(a.in + " is not a directory");

    std::vector<fs::path> sim_dirs, uq_reports;
    for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (!e.is_regular_file())
            continue;
        if (e.path().filename() == "series.csv" && fs::exists(e.path().parent_path() / "curve.csv"))
            sim_dirs.push_back(e.path().parent_path());
        if (e.path().filename() == "uq_report.csv")
            uq_reports.push_back(e.path());
    }
    std::sort(sim_dirs.begin(), sim_dirs.end());
    std::sort(uq_reports.begin(), uq_reports.end());
    if (sim_dirs.empty() && uq_reports.empty())
        throw ConfigError("no simulation or uq artifacts under " + a.in);

    for (const auto& dir : sim_dirs) {
        std::string name = fs::relative(dir, in).string();
        if (name == ".")
            name = dir.filename().string();
        if (name.empty() || name == ".")
            name = "run";
        std::replace(name.begin(), name.end(), '/', '_');

        const SensorSeries series = read_series_csv(dir / "series.csv");
        manifest.input(dir / "series.csv");
        const TimeSeriesMatrix pat = extract_patterns(series);
        std::vector<std::size_t> order(series.sensor_ids.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<std::string> names;
        if (fs::exists(dir / "sensors.json")) {
            const Json sj = Json::parse(io::read_file(dir / "sensors.json"));
            manifest.input(dir / "sensors.json");
            std::vector<std::size_t> front;
            for (const char* key : {"mid", "fillet"}) {
                const int id = sj.at("highlight").at(key);
                const auto it = std::find(series.sensor_ids.begin(), series.sensor_ids.end(), id);
                if (it != series.sensor_ids.end()) {
                    front.push_back(static_cast<std::size_t>(it - series.sensor_ids.begin()));
                    names.push_back(std::string(key) + "_s" + std::to_string(id));
                }
            }
            std::vector<std::size_t> rest;
            for (std::size_t j : order)
                if (std::find(front.begin(), front.end(), j) == front.end())
                    rest.push_back(j);
            front.insert(front.end(), rest.begin(), rest.end());
            order = front;
        }
        io::CsvTable st;
        st.header.push_back("t");
        for (std::size_t c = 0; c < order.size(); ++c)
            st.header.push_back(c < names.size() ? names[c] : "s" + std::to_string(series.sensor_ids[order[c]]));
        for (Eigen::Index i = 0; i < pat.rows(); ++i) {
            std::vector<double> row{pat.times[static_cast<std::size_t>(i)]};
            for (std::size_t j : order)
                row.push_back(pat.values(i, static_cast<Eigen::Index>(j)));
            st.rows.push_back(std::move(row));
        }
        io::write_file_atomic(out / (name + "_sensors.csv"), io::format_csv(st));
        manifest.output(out / (name + "_sensors.csv"));

        const LoadCurve curve = read_curve_csv(dir / "curve.csv");
        manifest.input(dir / "curve.csv");
        write_curve_csv(out / (name + "_curve.csv"), curve);
        manifest.output(out / (name + "_curve.csv"));
    }
    if (!uq_reports.empty()) {
        std::string merged = "algorithm,noise_std,mean_acc,std_acc,runs\n";
        for (const auto& p : uq_reports) {
            manifest.input(p);
            std::istringstream ss(io::read_file(p));
            std::string line;
            std::getline(ss, line);
            while (std::getline(ss, line))
                if (!line.empty())
                    merged += line + "\n";
        }
        io::write_file_atomic(out / "accuracy_vs_noise.csv", merged);
        manifest.output(out / "accuracy_vs_noise.csv");
    }
    io::write_file_atomic(out / "plot.py", kPlotScript);
    manifest.output(out / "plot.py");
    manifest.write(out, cfg, a.common.seed);
    std::cout << "report: " << sim_dirs.size() << " runs, " << uq_reports.size() << " uq reports\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Phase-field fatigue simulation and failure classification"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Run one case and write sensor series and load curve");
    add_common(s, sim.common);
    s->add_option("--case", sim.case_id, "Case 1-6 from the cases table");
    s->add_option("--mesh", sim.mesh_path, "Mesh file instead of the built-in specimen")->check(CLI::ExistingFile);
    s->add_flag("--desk", sim.desk, "Use the coarser desk-scale mesh size");
    s->add_option("--target-edge", sim.target_edge, "Mesh edge length in metres");
    s->add_option("--dt", sim.dt, "Time step in seconds");
    s->add_option("--t-max", sim.t_max, "Hard end time in seconds");
    s->add_option("--out", sim.out, "Output directory")->required();

    LabelArgs lab;
    auto* l = app.add_subcommand("label", "Label time steps of one or more runs");
    add_common(l, lab.common);
    l->add_option("--series", lab.series, "series.csv (repeat for location9)")->required()->check(CLI::ExistingFile);
    l->add_option("--curve", lab.curves, "curve.csv (repeat for location9)")->required()->check(CLI::ExistingFile);
    l->add_option("--case-ids", lab.case_ids, "Case id per series, location9 only")->delimiter(',');
    l->add_option("--scheme", lab.scheme, "bin1, bin2, bin3:85|90|95, multi3, multi4, location9")->required();
    l->add_option("--out", lab.out, "labels.csv path")->required();

    TrainArgs tr;
    auto* t = app.add_subcommand("train-eval", "Train a classifier and evaluate it on the held-out split");
    add_common(t, tr.common);
    t->add_option("--model", tr.model, "knn or ann")->check(CLI::IsMember({"knn", "ann"}));
    t->add_option("--comb", tr.comb, "Split combination 1-5")->check(CLI::Range(1, 5));
    t->add_option("--k", tr.k, "Neighbour count for knn")->check(CLI::PositiveNumber);
    t->add_option("--task", tr.task, "presence or location")->check(CLI::IsMember({"presence", "location"}));
    t->add_option("--series", tr.series, "series.csv files, rows stacked in order")->required()->check(CLI::ExistingFile);
    t->add_option("--labels", tr.labels, "labels.csv")->required()->check(CLI::ExistingFile);
    t->add_option("--out", tr.out, "Output directory")->required();

    UqArgs uq;
    auto* u = app.add_subcommand("uq", "Monte Carlo accuracy under split randomness and noise");
    add_common(u, uq.common);
    u->add_option("--runs", uq.runs, "Runs per cell")->check(CLI::PositiveNumber);
    u->add_option("--noise-std", uq.noise, "Noise standard deviations on phi")->delimiter(',')->check(CLI::NonNegativeNumber);
    u->add_option("--algorithms", uq.algorithms, "knn, ann")->delimiter(',');
    u->add_option("--threads", uq.threads, "Worker threads (PFL_THREADS caps this)")->check(CLI::PositiveNumber);
    u->add_option("--task", uq.task, "presence or location")->check(CLI::IsMember({"presence", "location"}));
    u->add_option("--series", uq.series, "series.csv files, rows stacked in order")->required()->check(CLI::ExistingFile);
    u->add_option("--labels", uq.labels, "labels.csv")->required()->check(CLI::ExistingFile);
    u->add_option("--out", uq.out, "Output directory")->required();

    ReportArgs rep;
    auto* r = app.add_subcommand("report", "Collect plot-ready CSVs and a plotting script");
    add_common(r, rep.common);
    r->add_option("--in", rep.in, "Directory with simulate/uq outputs")->required();
    r->add_option("--out", rep.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (s->parsed()) {
            Manifest m("simulate", argc, argv);
            return cmd_simulate(sim, m);
        }
        if (l->parsed()) {
            Manifest m("label", argc, argv);
            return cmd_label(lab, m);
        }
        if (t->parsed()) {
            Manifest m("train-eval", argc, argv);
            return cmd_train_eval(tr, m);
        }
        if (u->parsed()) {
            Manifest m("uq", argc, argv);
            return cmd_uq(uq, m);
        }
        Manifest m("report", argc, argv);
        return cmd_report(rep, m);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const Json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    }
}
