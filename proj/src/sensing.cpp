#include "pfl/sensing.hpp"

#include "pfl/constitutive.hpp"
#include "pfl/errors.hpp"
#include "pfl/io.hpp"

#include <algorithm>

namespace pfl {

SensorSeries series_from_record(const SimulationRecord& record)
{
    SensorSeries s;
    s.times = record.times;
    s.sensor_ids = record.sensor_ids;
    s.case_id = record.case_id;
    const auto m = static_cast<Eigen::Index>(record.sensor_phi.size());
    const auto n = static_cast<Eigen::Index>(record.sensor_ids.size());
    s.phi.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (static_cast<Eigen::Index>(record.sensor_phi[i].size()) != n)
            throw DataError("record row " + std::to_string(i) + " has the wrong number of sensors");
        for (Eigen::Index j = 0; j < n; ++j)
            s.phi(i, j) = record.sensor_phi[i][j];
    }
    return s;
}

TimeSeriesMatrix extract_patterns(const SensorSeries& series)
{
    if (static_cast<std::size_t>(series.phi.rows()) != series.times.size() ||
        static_cast<std::size_t>(series.phi.cols()) != series.sensor_ids.size())
        throw DataError("sensor series dimensions are inconsistent");
    TimeSeriesMatrix p;
    p.times = series.times;
    p.sensor_ids = series.sensor_ids;
    p.case_id = series.case_id;
    p.values = series.phi.unaryExpr([](double phi) { return degradation(phi); });
    return p;
}

TimeSeriesMatrix extract_patterns(const SimulationRecord& record, const SensorSet& sensors)
{
    const SensorSeries full = series_from_record(record);
    SensorSeries picked;
    picked.times = full.times;
    picked.case_id = full.case_id;
    picked.sensor_ids = sensors.node_ids;
    picked.phi.resize(full.phi.rows(), static_cast<Eigen::Index>(sensors.node_ids.size()));
    for (std::size_t j = 0; j < sensors.node_ids.size(); ++j) {
        const auto it = std::find(full.sensor_ids.begin(), full.sensor_ids.end(), sensors.node_ids[j]);
        if (it == full.sensor_ids.end())
            throw DataError("record has no column for sensor node " + std::to_string(sensors.node_ids[j]));
        picked.phi.col(static_cast<Eigen::Index>(j)) = full.phi.col(it - full.sensor_ids.begin());
    }
    return extract_patterns(picked);
}

namespace {

io::CsvTable to_table(const std::vector<double>& times, const std::vector<int>& ids, const RowMatrix& values)
{
    io::CsvTable t;
    t.header.push_back("t");
    for (int id : ids)
        t.header.push_back("s" + std::to_string(id));
    t.rows.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row{times[i]};
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            row.push_back(values(static_cast<Eigen::Index>(i), j));
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace

void write_series_csv(const std::filesystem::path& path, const SensorSeries& series)
{
    io::write_file_atomic(path, io::format_csv(to_table(series.times, series.sensor_ids, series.phi)));
}

void write_patterns_csv(const std::filesystem::path& path, const TimeSeriesMatrix& patterns)
{
    io::write_file_atomic(path, io::format_csv(to_table(patterns.times, patterns.sensor_ids, patterns.values)));
}

SensorSeries read_series_csv(const std::filesystem::path& path)
{
    const io::CsvTable t = io::read_csv(path);
    if (t.header.empty() || t.header[0] != "t")
        throw DataError(path.string() + ": first column must be 't'");
    SensorSeries s;
    for (std::size_t j = 1; j < t.header.size(); ++j) {
        const std::string& h = t.header[j];
        if (h.size() < 2 || h[0] != 's')
            throw DataError(path.string() + ": bad sensor column '" + h + "'");
        try {
            s.sensor_ids.push_back(std::stoi(h.substr(1)));
        } catch (const std::exception&) {
            throw DataError(path.string() + ": bad sensor column '" + h + "'");
        }
    }
    if (s.sensor_ids.empty())
        throw DataError(path.string() + ": no sensor columns");
    s.phi.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(s.sensor_ids.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        s.times.push_back(t.rows[i][0]);
        for (std::size_t j = 1; j < t.rows[i].size(); ++j)
            s.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = t.rows[i][j];
    }
    return s;
}

} // namespace pfl
