#pragma once

#include "pfl/mesh.hpp"
#include "pfl/timestepper.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

namespace pfl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raw damage histories at the sensors: one row per recorded step.
struct SensorSeries {
    std::vector<double> times;
    std::vector<int> sensor_ids;
    RowMatrix phi;
    int case_id = 0;
};

/// Pattern matrix of degradation values g(phi), m steps by n sensors.
struct TimeSeriesMatrix {
    RowMatrix values;
    std::vector<double> times;
    std::vector<int> sensor_ids;
    int case_id = 0;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

SensorSeries series_from_record(const SimulationRecord& record);

/// Columns ordered as in `sensors`; throws DataError if the record lacks one.
TimeSeriesMatrix extract_patterns(const SimulationRecord& record, const SensorSet& sensors);
TimeSeriesMatrix extract_patterns(const SensorSeries& series);

/// series.csv: header t,s<id>,... with raw phi values.
void write_series_csv(const std::filesystem::path& path, const SensorSeries& series);
SensorSeries read_series_csv(const std::filesystem::path& path);
/// patterns.csv: same header as series.csv, entries g(phi).
void write_patterns_csv(const std::filesystem::path& path, const TimeSeriesMatrix& patterns);

} // namespace pfl
