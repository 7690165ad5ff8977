#include "pfl/dataset.hpp"

#include "pfl/errors.hpp"

namespace pfl {

LabelVector case_labels(const SensorSeries& series, const LoadCurve& curve, LabelScheme scheme,
                        const LabelSettings& settings)
{
    if (curve.size() != series.times.size())
        throw DataError("series has " + std::to_string(series.times.size()) + " rows but the load curve has " +
                        std::to_string(curve.size()));
    switch (scheme) {
    case LabelScheme::Multi3: return label_multi3(curve, settings);
    case LabelScheme::Multi4: return label_multi4(extract_patterns(series), settings);
    default: throw ConfigError("per-case labels must use multi3 or multi4");
    }
}

Dataset presence_dataset(const SensorSeries& series, const LoadCurve& curve, LabelScheme scheme,
                         const LabelSettings& settings)
{
    const LabelVector lv = case_labels(series, curve, scheme, settings);
    return Dataset{series.phi, series.times, lv.labels, lv.class_domain};
}

Dataset location_dataset(const std::vector<CaseRun>& runs, LabelScheme per_case_scheme, const LabelSettings& settings)
{
    if (runs.empty())
        throw DataError("location dataset needs at least one case");
    std::vector<CaseLabels> per_case;
    Eigen::Index rows = 0;
    const Eigen::Index cols = runs.front().series.phi.cols();
    for (const auto& r : runs) {
        if (r.series.phi.cols() != cols || r.series.sensor_ids != runs.front().series.sensor_ids)
            throw DataError("location cases use different sensor sets");
        per_case.push_back({r.case_id, case_labels(r.series, r.curve, per_case_scheme, settings)});
        rows += r.series.phi.rows();
    }
    const LabelVector lv = label_location9(per_case);
    Dataset d;
    d.phi.resize(rows, cols);
    Eigen::Index at = 0;
    for (const auto& r : runs) {
        d.phi.middleRows(at, r.series.phi.rows()) = r.series.phi;
        d.times.insert(d.times.end(), r.series.times.begin(), r.series.times.end());
        at += r.series.phi.rows();
    }
    d.labels = lv.labels;
    d.class_domain = lv.class_domain;
    return d;
}

} // namespace pfl
