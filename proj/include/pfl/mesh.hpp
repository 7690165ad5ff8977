#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace pfl {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Dog-bone tensile specimen, centred at the origin with the load axis along x.
/// All lengths in metres.
struct SpecimenParams {
    double gauge_length = 31e-3;
    double gauge_width = 12e-3;
    double grip_width = 20e-3;
    double fillet_radius = 10e-3;
    double thickness = 5e-3;
    double total_length = 62e-3;

    void validate() const;

    /// Horizontal extent of one fillet (gauge edge to grip edge).
    double transition_length() const;
    /// Half width of the outline at abscissa x.
    double half_width(double x) const;
    /// Closed-form area of the outline.
    double area() const;
};

struct Mesh {
    std::vector<Point2> nodes;
    std::vector<std::array<int, 3>> elements;
    std::vector<int> fixed_set;   // x = min end, clamped
    std::vector<int> loaded_set;  // x = max end, pulled
    double min_edge = 0.0;

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_elements() const { return elements.size(); }

    double element_area(std::size_t e) const;
    double total_area() const;

    /// Throws DataError on dangling indices, non-positive areas or bad node sets.
    void validate() const;
};

/// Builds a mapped triangulation of the specimen outline. Columns are placed so
/// that the gauge/fillet/grip break points are mesh lines; rows follow the local
/// half width. `target_edge` is the desired element edge length in the gauge.
Mesh build_specimen(const SpecimenParams& params, double target_edge);

double compute_min_edge(const Mesh& mesh);

/// Text format: NODES (id x y), ELEMENTS (id n1 n2 n3), SET <name> (node ids).
/// Node ids in files may be arbitrary; they are remapped to 0-based indices.
void write_mesh(std::ostream& out, const Mesh& mesh);
/// Same as write_mesh with an extra per-node scalar column appended to NODES.
void write_mesh_with_field(std::ostream& out, const Mesh& mesh, const std::vector<double>& field,
                           const std::string& field_name);
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

struct SensorSet {
    std::vector<int> node_ids;
    std::string layout_descriptor;
};

/// Grid points (physical coordinates) used to pick sensor nodes.
struct SensorGrid {
    std::vector<Point2> points;
    std::string descriptor;
};

/// Nearest mesh node per grid point, duplicates dropped, order of first occurrence kept.
SensorSet select_sensors(const Mesh& mesh, const SensorGrid& grid);

/// Default coarse-to-fine layout: `columns` abscissae with doubled density over
/// the fillets, `rows` normalised heights across the local width.
SensorGrid default_sensor_grid(const SpecimenParams& params, int columns = 29, int rows = 5);

/// Index (into SensorSet::node_ids) of the sensor closest to a point.
std::size_t nearest_sensor(const Mesh& mesh, const SensorSet& sensors, Point2 p);

} // namespace pfl
