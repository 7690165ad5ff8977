#pragma once

#include "pfl/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace pfl::test {

inline bool rel_close(double got, double want, double rel)
{
    if (want == 0.0)
        return std::abs(got) <= rel;
    return std::abs(got - want) <= rel * std::abs(want);
}

/// Plain rectangle through the specimen builder (no fillet, equal widths).
inline Mesh rectangle_mesh(double length, double width, double target_edge, double thickness = 5e-3)
{
    SpecimenParams p;
    p.gauge_length = 0.5 * length;
    p.total_length = length;
    p.gauge_width = width;
    p.grip_width = width;
    p.fillet_radius = 0.0;
    p.thickness = thickness;
    return build_specimen(p, target_edge);
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("pfl_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace pfl::test
