#pragma once

#include "pfl/sensing.hpp"
#include "pfl/timestepper.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pfl {

struct LoadCurve {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> f;

    std::size_t size() const { return f.size(); }
    void validate() const;
};

LoadCurve compute_load_curve(const SimulationRecord& record);

/// curve.csv: t,u,f
void write_curve_csv(const std::filesystem::path& path, const LoadCurve& curve);
LoadCurve read_curve_csv(const std::filesystem::path& path);

enum class BinaryCriterion {
    PeakForce,      // argmax f
    MinSlope,       // argmin of df/du on the smoothed curve
    ForceFraction,  // first post-peak step with f <= p * max f
};

enum class LabelScheme { Bin1, Bin2, Bin3, Multi3, Multi4, Location9 };

struct LabelSettings {
    int smoothing_window = 5;
    double multi4_r1 = 1.0;
    double multi4_r2 = 0.92;
    double multi4_r3 = 0.85;
};

struct LabelVector {
    LabelScheme scheme = LabelScheme::Bin1;
    std::vector<int> labels;
    std::vector<int> class_domain;
    /// First index of each class after the first, where defined.
    std::vector<std::size_t> transitions;
    double fraction = 0.0;  // Bin3 only
};

std::string scheme_name(LabelScheme scheme, double fraction = 0.0);
/// Accepts bin1, bin2, bin3:85|90|95, multi3, multi4, location9.
/// Throws ConfigError otherwise.
LabelScheme parse_scheme(const std::string& text, double* fraction);

/// Index of the 0 -> 1 transition. Throws LabelingError if there is none.
std::size_t find_transition(const LoadCurve& curve, BinaryCriterion criterion, double fraction = 0.9,
                            const LabelSettings& settings = {});

/// Centred differences of the moving-average force with respect to u.
std::vector<double> smoothed_slope(const LoadCurve& curve, int window);

LabelVector label_binary(const LoadCurve& curve, BinaryCriterion criterion, double fraction = 0.9,
                         const LabelSettings& settings = {});
LabelVector label_multi3(const LoadCurve& curve, const LabelSettings& settings = {});

/// Per-row class from the count of sensors in each damage band.
int multi4_row_class(const double* g, Eigen::Index n, const LabelSettings& settings = {});
LabelVector label_multi4(const TimeSeriesMatrix& patterns, const LabelSettings& settings = {});

struct CaseLabels {
    int case_id;
    LabelVector labels;  // three ordinal classes 1..3
};

/// Classes 1..9 as 3 (case - 1) + class, rows concatenated in input order.
LabelVector label_location9(const std::vector<CaseLabels>& per_case);

/// labels.csv (t,label) plus a JSON sidecar with scheme details.
void write_labels(const std::filesystem::path& csv_path, const std::vector<double>& times,
                  const LabelVector& labels, const LabelSettings& settings);
/// Reads labels.csv; returns (times, labels).
std::pair<std::vector<double>, std::vector<int>> read_labels_csv(const std::filesystem::path& path);

} // namespace pfl
