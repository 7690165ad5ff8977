#include "pfl/labeling.hpp"

#include "pfl/errors.hpp"
#include "pfl/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace pfl {

void LoadCurve::validate() const
{
    if (u.size() != f.size() || t.size() != f.size())
        throw DataError("load curve arrays differ in length");
    if (f.empty())
        throw DataError("empty load curve");
    for (std::size_t i = 1; i < u.size(); ++i)
        if (u[i] < u[i - 1])
            throw DataError("load curve displacement decreases at step " + std::to_string(i));
}

LoadCurve compute_load_curve(const SimulationRecord& record)
{
    LoadCurve c{record.times, record.applied_disp, record.reaction_force};
    c.validate();
    return c;
}

void write_curve_csv(const std::filesystem::path& path, const LoadCurve& curve)
{
    io::CsvTable t;
    t.header = {"t", "u", "f"};
    for (std::size_t i = 0; i < curve.size(); ++i)
        t.rows.push_back({curve.t[i], curve.u[i], curve.f[i]});
    io::write_file_atomic(path, io::format_csv(t));
}

LoadCurve read_curve_csv(const std::filesystem::path& path)
{
    const io::CsvTable t = io::read_csv(path);
    const std::size_t it = t.column("t"), iu = t.column("u"), iff = t.column("f");
    LoadCurve c;
    for (const auto& row : t.rows) {
        c.t.push_back(row[it]);
        c.u.push_back(row[iu]);
        c.f.push_back(row[iff]);
    }
    c.validate();
    return c;
}

std::string scheme_name(LabelScheme scheme, double fraction)
{
    switch (scheme) {
    case LabelScheme::Bin1: return "bin1";
    case LabelScheme::Bin2: return "bin2";
    case LabelScheme::Bin3: return "bin3:" + std::to_string(static_cast<int>(std::lround(fraction * 100)));
    case LabelScheme::Multi3: return "multi3";
    case LabelScheme::Multi4: return "multi4";
    case LabelScheme::Location9: return "location9";
    }
    return "unknown";
}

LabelScheme parse_scheme(const std::string& text, double* fraction)
{
    if (fraction)
        *fraction = 0.0;
    if (text == "bin1")
        return LabelScheme::Bin1;
    if (text == "bin2")
        return LabelScheme::Bin2;
    if (text == "multi3")
        return LabelScheme::Multi3;
    if (text == "multi4")
        return LabelScheme::Multi4;
    if (text == "location9")
        return LabelScheme::Location9;
    for (int p : {85, 90, 95}) {
        if (text == "bin3:" + std::to_string(p)) {
            if (fraction)
                *fraction = p / 100.0;
            return LabelScheme::Bin3;
        }
    }
    throw ConfigError("unknown label scheme '" + text + "'");
}

namespace {

std::size_t peak_index(const LoadCurve& curve)
{
    curve.validate();
    const auto it = std::max_element(curve.f.begin(), curve.f.end());
    const auto ip = static_cast<std::size_t>(it - curve.f.begin());
    if (ip + 1 >= curve.size() || !(*it > 0.0))
        throw LabelingError("no transition found: force has no interior peak");
    return ip;
}

} // namespace

std::vector<double> smoothed_slope(const LoadCurve& curve, int window)
{
    if (window < 1)
        throw ConfigError("smoothing window must be >= 1");
    const std::size_t n = curve.size();
    const std::ptrdiff_t half = window / 2;
    std::vector<double> fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, static_cast<std::ptrdiff_t>(i) + half);
        double s = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j)
            s += curve.f[static_cast<std::size_t>(j)];
        fs[i] = s / static_cast<double>(hi - lo + 1);
    }
    std::vector<double> slope(n, 0.0);
    if (n < 2)
        return slope;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == n ? n - 1 : i + 1;
        const double du = curve.u[b] - curve.u[a];
        slope[i] = du > 0.0 ? (fs[b] - fs[a]) / du : 0.0;
    }
    return slope;
}

std::size_t find_transition(const LoadCurve& curve, BinaryCriterion criterion, double fraction,
                            const LabelSettings& settings)
{
    const std::size_t ip = peak_index(curve);
    switch (criterion) {
    case BinaryCriterion::PeakForce:
        return ip;
    case BinaryCriterion::MinSlope: {
        const auto s = smoothed_slope(curve, settings.smoothing_window);
        return static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
    }
    case BinaryCriterion::ForceFraction: {
        if (!(fraction > 0.0 && fraction < 1.0))
            throw ConfigError("force fraction must lie in (0, 1)");
        const double level = fraction * curve.f[ip];
        for (std::size_t i = ip + 1; i < curve.size(); ++i)
            if (curve.f[i] <= level)
                return i;
        throw LabelingError("no transition found: force never drops to " +
                            std::to_string(static_cast<int>(std::lround(fraction * 100))) + "% of its peak");
    }
    }
    throw ConfigError("bad criterion");
}

LabelVector label_binary(const LoadCurve& curve, BinaryCriterion criterion, double fraction,
                         const LabelSettings& settings)
{
    const std::size_t k = find_transition(curve, criterion, fraction, settings);
    LabelVector lv;
    lv.scheme = criterion == BinaryCriterion::PeakForce ? LabelScheme::Bin1
              : criterion == BinaryCriterion::MinSlope  ? LabelScheme::Bin2
                                                        : LabelScheme::Bin3;
    lv.fraction = lv.scheme == LabelScheme::Bin3 ? fraction : 0.0;
    lv.class_domain = {0, 1};
    lv.labels.assign(curve.size(), 0);
    std::fill(lv.labels.begin() + static_cast<std::ptrdiff_t>(k), lv.labels.end(), 1);
    lv.transitions = {k};
    return lv;
}

LabelVector label_multi3(const LoadCurve& curve, const LabelSettings& settings)
{
    const std::size_t l95 = find_transition(curve, BinaryCriterion::ForceFraction, 0.95, settings);
    const std::size_t l90 = find_transition(curve, BinaryCriterion::ForceFraction, 0.90, settings);
    LabelVector lv;
    lv.scheme = LabelScheme::Multi3;
    lv.class_domain = {1, 2, 3};
    lv.labels.resize(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i)
        lv.labels[i] = i < l95 ? 1 : (i < l90 ? 2 : 3);
    lv.transitions = {l95, l90};
    return lv;
}

int multi4_row_class(const double* g, Eigen::Index n, const LabelSettings& settings)
{
    std::array<int, 3> count{0, 0, 0};
    for (Eigen::Index j = 0; j < n; ++j) {
        const double v = g[j];
        if (v > settings.multi4_r2)
            ++count[0];  // v above R1 (noise) is still intact
        else if (v > settings.multi4_r3)
            ++count[1];
        else
            ++count[2];
    }
    int best = 2;
    for (int k = 1; k >= 0; --k)
        if (count[static_cast<std::size_t>(k)] > count[static_cast<std::size_t>(best)])
            best = k;
    return best + 1;
}

LabelVector label_multi4(const TimeSeriesMatrix& patterns, const LabelSettings& settings)
{
    if (!(settings.multi4_r1 >= settings.multi4_r2 && settings.multi4_r2 >= settings.multi4_r3))
        throw ConfigError("multi4 thresholds must satisfy R1 >= R2 >= R3");
    LabelVector lv;
    lv.scheme = LabelScheme::Multi4;
    lv.class_domain = {1, 2, 3};
    lv.labels.resize(static_cast<std::size_t>(patterns.rows()));
    for (Eigen::Index i = 0; i < patterns.rows(); ++i)
        lv.labels[static_cast<std::size_t>(i)] = multi4_row_class(patterns.values.row(i).data(), patterns.cols(), settings);
    for (std::size_t i = 1; i < lv.labels.size(); ++i)
        if (lv.labels[i] != lv.labels[i - 1])
            lv.transitions.push_back(i);
    return lv;
}

LabelVector label_location9(const std::vector<CaseLabels>& per_case)
{
    LabelVector lv;
    lv.scheme = LabelScheme::Location9;
    lv.class_domain = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    for (const auto& cl : per_case) {
        if (cl.case_id < 1 || cl.case_id > 3)
            throw LabelingError("location labels defined for cases 1-3 only, got case " + std::to_string(cl.case_id));
        for (int v : cl.labels.labels) {
            if (v < 1 || v > 3)
                throw LabelingError("location labels need classes 1-3, got " + std::to_string(v));
            lv.labels.push_back(3 * (cl.case_id - 1) + v);
        }
    }
    return lv;
}

void write_labels(const std::filesystem::path& csv_path, const std::vector<double>& times, const LabelVector& labels,
                  const LabelSettings& settings)
{
    if (times.size() != labels.labels.size())
        throw DataError("label count does not match time count");
    std::string out = "t,label\n";
    for (std::size_t i = 0; i < times.size(); ++i)
        out += io::format_double(times[i]) + "," + std::to_string(labels.labels[i]) + "\n";
    io::write_file_atomic(csv_path, out);

    nlohmann::json meta;
    meta["scheme"] = scheme_name(labels.scheme, labels.fraction);
    meta["class_domain"] = labels.class_domain;
    meta["transitions"] = labels.transitions;
    std::vector<double> tt;
    for (auto k : labels.transitions)
        if (k < times.size())
            tt.push_back(times[k]);
    meta["transition_times"] = tt;
    meta["smoothing_window"] = settings.smoothing_window;
    if (labels.scheme == LabelScheme::Multi4)
        meta["thresholds"] = {settings.multi4_r1, settings.multi4_r2, settings.multi4_r3};
    if (labels.scheme == LabelScheme::Bin3)
        meta["fraction"] = labels.fraction;
    std::filesystem::path side = csv_path;
    side.replace_extension(".json");
    io::write_file_atomic(side, meta.dump(2) + "\n");
}

std::pair<std::vector<double>, std::vector<int>> read_labels_csv(const std::filesystem::path& path)
{
    const io::CsvTable t = io::read_csv(path);
    const std::size_t it = t.column("t"), il = t.column("label");
    std::pair<std::vector<double>, std::vector<int>> out;
    for (const auto& row : t.rows) {
        const double l = row[il];
        if (l != std::floor(l))
            throw DataError(path.string() + ": non-integer label");
        out.first.push_back(row[it]);
        out.second.push_back(static_cast<int>(l));
    }
    return out;
}

} // namespace pfl
