#pragma once

#include "pfl/labeling.hpp"
#include "pfl/sensing.hpp"

#include <vector>

namespace pfl {

/// Raw phi rows with one label per row.
struct Dataset {
    RowMatrix phi;
    std::vector<double> times;
    std::vector<int> labels;
    std::vector<int> class_domain;
};

/// Per-case labels for the multi-class schemes (multi3 from the load curve,
/// multi4 from the clean patterns).
LabelVector case_labels(const SensorSeries& series, const LoadCurve& curve, LabelScheme scheme,
                        const LabelSettings& settings);

Dataset presence_dataset(const SensorSeries& series, const LoadCurve& curve, LabelScheme scheme,
                         const LabelSettings& settings);

struct CaseRun {
    int case_id;
    SensorSeries series;
    LoadCurve curve;
};

/// Cases 1-3 stacked in input order with nine location classes.
Dataset location_dataset(const std::vector<CaseRun>& runs, LabelScheme per_case_scheme, const LabelSettings& settings);

} // namespace pfl
