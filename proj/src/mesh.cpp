#include "pfl/mesh.hpp"

#include "pfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pfl {

void SpecimenParams::validate() const
{
    if (!(gauge_length > 0 && gauge_width > 0 && grip_width > 0 && fillet_radius >= 0 &&
          thickness > 0 && total_length > 0))
        throw ConfigError("specimen lengths must be positive");
    if (grip_width < gauge_width)
        throw ConfigError("grip_width must not be smaller than gauge_width");
    const double rise = 0.5 * (grip_width - gauge_width);
    if (rise > fillet_radius)
        throw ConfigError("fillet radius too small for the width step between gauge and grip");
    if (gauge_length + 2.0 * transition_length() >= total_length)
        throw ConfigError("fillet larger than the transition region: gauge plus fillets exceed total length");
}

double SpecimenParams::transition_length() const
{
    const double rise = 0.5 * (grip_width - gauge_width);
    if (rise <= 0.0)
        return 0.0;
    return std::sqrt(2.0 * fillet_radius * rise - rise * rise);
}

double SpecimenParams::half_width(double x) const
{
    const double s = std::abs(x) - 0.5 * gauge_length;
    const double hg = 0.5 * gauge_width;
    if (s <= 0.0)
        return hg;
    const double lt = transition_length();
    if (s >= lt)
        return 0.5 * grip_width;
    const double r = fillet_radius;
    return hg + r - std::sqrt(std::max(0.0, r * r - s * s));
}

double SpecimenParams::area() const
{
    const double hg = 0.5 * gauge_width;
    const double hr = 0.5 * grip_width;
    const double lt = transition_length();
    const double r = fillet_radius;
    double fillet = (hg + r) * lt;
    if (lt > 0.0)
        fillet -= 0.5 * lt * std::sqrt(r * r - lt * lt) + 0.5 * r * r * std::asin(lt / r);
    const double grip_len = 0.5 * (total_length - gauge_length) - lt;
    // Upper half, both sides, then mirror.
    return 2.0 * (hg * gauge_length + 2.0 * fillet + 2.0 * hr * grip_len);
}

double Mesh::element_area(std::size_t e) const
{
    const auto& el = elements.at(e);
    const Point2& a = nodes[el[0]];
    const Point2& b = nodes[el[1]];
    const Point2& c = nodes[el[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::total_area() const
{
    double sum = 0.0;
    for (std::size_t e = 0; e < elements.size(); ++e)
        sum += element_area(e);
    return sum;
}

void Mesh::validate() const
{
    const int n = static_cast<int>(nodes.size());
    std::vector<char> used(nodes.size(), 0);
    for (std::size_t e = 0; e < elements.size(); ++e) {
        for (int v : elements[e]) {
            if (v < 0 || v >= n)
                throw DataError("element " + std::to_string(e) + " references invalid node " + std::to_string(v));
            used[v] = 1;
        }
        if (!(element_area(e) > 0.0))
            throw DataError("element " + std::to_string(e) + " has non-positive area");
    }
    if (std::find(used.begin(), used.end(), 0) != used.end())
        throw DataError("mesh contains nodes not referenced by any element");
    if (fixed_set.empty() || loaded_set.empty())
        throw DataError("fixed and loaded node sets must be non-empty");
    std::unordered_set<int> fixed(fixed_set.begin(), fixed_set.end());
    for (int v : loaded_set) {
        if (v < 0 || v >= n)
            throw DataError("loaded set references invalid node");
        if (fixed.count(v))
            throw DataError("fixed and loaded node sets overlap");
    }
    for (int v : fixed_set)
        if (v < 0 || v >= n)
            throw DataError("fixed set references invalid node");
}

double compute_min_edge(const Mesh& mesh)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& el : mesh.elements) {
        for (int k = 0; k < 3; ++k) {
            const Point2& a = mesh.nodes[el[k]];
            const Point2& b = mesh.nodes[el[(k + 1) % 3]];
            best = std::min(best, std::hypot(b.x - a.x, b.y - a.y));
        }
    }
    return best;
}

namespace {

// Splits [a, b] into ceil((b - a) / h) equal intervals, appending the interior
// points and b to `xs`.
void append_segment(std::vector<double>& xs, double a, double b, double h)
{
    if (b - a <= 0.0)
        return;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
    for (int i = 1; i <= n; ++i)
        xs.push_back(a + (b - a) * static_cast<double>(i) / n);
}

} // namespace

Mesh build_specimen(const SpecimenParams& params, double target_edge)
{
    params.validate();
    if (!(target_edge > 0.0))
        throw ConfigError("target_edge must be positive");

    const double half_len = 0.5 * params.total_length;
    const double half_gauge = 0.5 * params.gauge_length;
    const double lt = params.transition_length();

    // Column abscissae; break points at grip/fillet and fillet/gauge junctions.
    std::vector<double> breaks{-half_len, -half_gauge - lt, -half_gauge, half_gauge, half_gauge + lt, half_len};
    breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                 breaks.end());
    std::vector<double> xs{breaks.front()};
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s)
        append_segment(xs, breaks[s], breaks[s + 1], target_edge);

    const int rows = std::max(1, static_cast<int>(std::lround(params.gauge_width / target_edge)));
    const int ncol = static_cast<int>(xs.size());
    const int nrow = rows + 1;

    Mesh mesh;
    mesh.nodes.reserve(static_cast<std::size_t>(ncol) * nrow);
    for (int i = 0; i < ncol; ++i) {
        const double hw = params.half_width(xs[i]);
        for (int j = 0; j < nrow; ++j) {
            const double s = -1.0 + 2.0 * static_cast<double>(j) / rows;
            mesh.nodes.push_back({xs[i], s * hw});
        }
    }
    auto id = [nrow](int i, int j) { return i * nrow + j; };
    mesh.elements.reserve(2 * static_cast<std::size_t>(ncol - 1) * rows);
    for (int i = 0; i + 1 < ncol; ++i) {
        for (int j = 0; j < rows; ++j) {
            const int n00 = id(i, j), n10 = id(i + 1, j), n11 = id(i + 1, j + 1), n01 = id(i, j + 1);
            // Alternating diagonals avoid a preferred shear direction.
            if ((i + j) % 2 == 0) {
                mesh.elements.push_back({n00, n10, n11});
                mesh.elements.push_back({n00, n11, n01});
            } else {
                mesh.elements.push_back({n00, n10, n01});
                mesh.elements.push_back({n10, n11, n01});
            }
        }
    }
    for (int j = 0; j < nrow; ++j) {
        mesh.fixed_set.push_back(id(0, j));
        mesh.loaded_set.push_back(id(ncol - 1, j));
    }
    mesh.min_edge = compute_min_edge(mesh);
    mesh.validate();
    return mesh;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

void write_body(std::ostream& out, const Mesh& mesh, const std::vector<double>* field, const std::string& name)
{
    out << std::setprecision(17);
    out << "NODES";
    if (field)
        out << ' ' << name;
    out << '\n';
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        out << i << ' ' << mesh.nodes[i].x << ' ' << mesh.nodes[i].y;
        if (field)
            out << ' ' << (*field)[i];
        out << '\n';
    }
    out << "ELEMENTS\n";
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto& el = mesh.elements[e];
        out << e << ' ' << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
    }
    auto write_set = [&](const char* set_name, const std::vector<int>& ids) {
        out << "SET " << set_name << '\n';
        for (int v : ids)
            out << v << '\n';
    };
    write_set("fixed", mesh.fixed_set);
    write_set("loaded", mesh.loaded_set);
}

} // namespace

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    write_body(out, mesh, nullptr, {});
}

void write_mesh_with_field(std::ostream& out, const Mesh& mesh, const std::vector<double>& field,
                           const std::string& field_name)
{
    if (field.size() != mesh.nodes.size())
        throw DataError("field length does not match node count");
    write_body(out, mesh, &field, field_name);
}

Mesh read_mesh(std::istream& in)
{
    enum class Section { None, Nodes, Elements, Set };
    Section section = Section::None;
    std::string set_name;
    std::unordered_map<long, int> node_index;
    std::vector<std::array<long, 3>> raw_elements;
    std::map<std::string, std::vector<long>> raw_sets;
    Mesh mesh;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;
        if (first == "NODES") {
            section = Section::Nodes;
            continue;
        }
        if (first == "ELEMENTS") {
            section = Section::Elements;
            continue;
        }
        if (first == "SET") {
            if (!(ls >> set_name))
                throw DataError("line " + std::to_string(lineno) + ": SET without a name");
            section = Section::Set;
            raw_sets[set_name];
            continue;
        }
        const auto bad = [&] { return DataError("line " + std::to_string(lineno) + ": malformed record"); };
        long id = 0;
        try {
            id = std::stol(first);
        } catch (const std::exception&) {
            throw bad();
        }
        switch (section) {
        case Section::Nodes: {
            Point2 p;
            if (!(ls >> p.x >> p.y))
                throw bad();
            if (!node_index.emplace(id, static_cast<int>(mesh.nodes.size())).second)
                throw DataError("duplicate node id " + std::to_string(id));
            mesh.nodes.push_back(p);
            break;
        }
        case Section::Elements: {
            std::array<long, 3> el{};
            if (!(ls >> el[0] >> el[1] >> el[2]))
                throw bad();
            raw_elements.push_back(el);
            break;
        }
        case Section::Set:
            raw_sets[set_name].push_back(id);
            break;
        case Section::None:
            throw DataError("line " + std::to_string(lineno) + ": record outside of a section");
        }
    }

    auto lookup = [&](long id) {
        auto it = node_index.find(id);
        if (it == node_index.end())
            throw DataError("unknown node id " + std::to_string(id));
        return it->second;
    };
    for (const auto& el : raw_elements)
        mesh.elements.push_back({lookup(el[0]), lookup(el[1]), lookup(el[2])});
    for (auto& el : mesh.elements) {
        // Accept clockwise input by flipping orientation.
        const Point2 &a = mesh.nodes[el[0]], &b = mesh.nodes[el[1]], &c = mesh.nodes[el[2]];
        if ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y) < 0.0)
            std::swap(el[1], el[2]);
    }
    for (long id : raw_sets["fixed"])
        mesh.fixed_set.push_back(lookup(id));
    for (long id : raw_sets["loaded"])
        mesh.loaded_set.push_back(lookup(id));
    mesh.min_edge = mesh.elements.empty() ? 0.0 : compute_min_edge(mesh);
    mesh.validate();
    return mesh;
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open mesh file: " + path);
    return read_mesh(in);
}

// ---------------------------------------------------------------------------
// Sensors

SensorSet select_sensors(const Mesh& mesh, const SensorGrid& grid)
{
    SensorSet out;
    out.layout_descriptor = grid.descriptor;
    std::unordered_set<int> seen;
    for (const Point2& p : grid.points) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            const double d = std::hypot(mesh.nodes[i].x - p.x, mesh.nodes[i].y - p.y);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0 && seen.insert(best).second)
            out.node_ids.push_back(best);
    }
    if (out.node_ids.empty())
        throw ConfigError("sensor selection produced no nodes");
    return out;
}

SensorGrid default_sensor_grid(const SpecimenParams& params, int columns, int rows)
{
    params.validate();
    if (columns < 1 || rows < 1)
        throw ConfigError("sensor grid needs at least one column and one row");

    const double half_len = 0.5 * params.total_length;
    const double margin = 0.04 * params.total_length;
    const double x0 = -half_len + margin;
    const double x1 = half_len - margin;
    const double half_gauge = 0.5 * params.gauge_length;
    const double lt = params.transition_length();
    // Doubled density over each fillet, widened by a few millimetres.
    const double pad = 0.15 * params.gauge_length * 0.5;
    auto density = [&](double x) {
        const double s = std::abs(x);
        return (s >= half_gauge - pad && s <= half_gauge + lt + pad) ? 2.0 : 1.0;
    };

    // Place columns at equal quantiles of the cumulative density.
    constexpr int samples = 20000;
    std::vector<double> cum(samples + 1, 0.0);
    for (int i = 1; i <= samples; ++i) {
        const double xm = x0 + (x1 - x0) * (i - 0.5) / samples;
        cum[i] = cum[i - 1] + density(xm);
    }
    std::vector<double> xs;
    for (int c = 0; c < columns; ++c) {
        const double target = columns == 1 ? 0.5 * cum.back() : cum.back() * c / (columns - 1);
        const auto it = std::lower_bound(cum.begin(), cum.end(), target - 1e-12);
        const auto k = static_cast<double>(std::distance(cum.begin(), it));
        xs.push_back(x0 + (x1 - x0) * k / samples);
    }
    // Force a symmetric layout with an exact centre column when the count is odd.
    for (int c = 0; c < columns / 2; ++c) {
        const double m = 0.5 * (xs[c] - xs[columns - 1 - c]);
        xs[c] = m;
        xs[columns - 1 - c] = -m;
    }
    if (columns % 2 == 1)
        xs[columns / 2] = 0.0;

    SensorGrid grid;
    for (int c = 0; c < columns; ++c) {
        const double hw = params.half_width(xs[c]);
        for (int r = 0; r < rows; ++r) {
            const double s = rows == 1 ? 0.0 : -0.8 + 1.6 * r / (rows - 1);
            grid.points.push_back({xs[c], s * hw});
        }
    }
    std::ostringstream desc;
    desc << "grid " << columns << "x" << rows << ", doubled density over fillets";
    grid.descriptor = desc.str();
    return grid;
}

std::size_t nearest_sensor(const Mesh& mesh, const SensorSet& sensors, Point2 p)
{
    if (sensors.node_ids.empty())
        throw DataError("empty sensor set");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sensors.node_ids.size(); ++k) {
        const Point2& q = mesh.nodes.at(sensors.node_ids[k]);
        const double d = std::hypot(q.x - p.x, q.y - p.y);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

} // namespace pfl
