#pragma once

#include "isohull/isohull.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace testutil {

using isohull::Vector;

inline isohull::PointCloud axes_cloud(std::size_t n, double scale = 1.0)
{
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < n; ++i) {
        Vector e(n, 0.0);
        e[i] = scale;
        pts.push_back(e);
    }
    return isohull::PointCloud::from_points(n, pts);
}

/// conv{+-e_1, ..., +-e_n}
inline isohull::FacetComplex cross_polytope(std::size_t n) { return isohull::symmetric_hull(axes_cloud(n)); }

inline double factorial(std::size_t k)
{
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) {
        f *= static_cast<double>(i);
    }
    return f;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Applies x -> T x to every point of a cloud.
inline isohull::PointCloud transform_cloud(const isohull::PointCloud& c, const isohull::Matrix& t)
{
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < c.m; ++i) {
        pts.push_back(t.apply(c.point(i)));
    }
    return isohull::PointCloud::from_points(c.n, pts, c.seed);
}

/// Table rows of a complex as plain vectors.
inline std::vector<std::vector<double>> table_rows(const isohull::FacetComplex& fc)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < fc.point_count(); ++i) {
        const auto v = fc.vertex(i);
        rows.emplace_back(v.begin(), v.end());
    }
    return rows;
}

inline std::string source_path(const std::string& rel) { return std::string(ISOHULL_SOURCE_DIR) + "/" + rel; }

} // namespace testutil
