#pragma once

// Boundary complex of the symmetric hull conv{+-P_1, ..., +-P_m} in R^n.
//
// Construction is incremental beneath-beyond: start from a simplex of n + 1
// affinely independent points, then insert points one at a time, deleting
// the facets the new point sees and coning the horizon to it. Every pending
// point is kept in the outside set of one facet it sees; the furthest point
// of a set is inserted next.

#include "isohull/errors.hpp"
#include "isohull/linalg.hpp"
#include "isohull/sphere_stats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace isohull {

inline constexpr double kCoplanarTol = 1e-9;

/// One simplicial facet. vertex_ids index the symmetrized point table and are
/// kept sorted; id i + m stands for -P_i.
struct Facet
{
    std::vector<int> vertex_ids;
    Vector normal; // outward unit normal
    double dist = 0.0; // d(0, F)
    double volume = 0.0; // (n-1)-dimensional volume
};

struct FacetComplex
{
    std::size_t n = 0;
    std::size_t m = 0; // base points; the table holds 2m rows
    std::uint64_t seed = 0;
    std::vector<double> coords; // 2m x n, rows m..2m-1 are the antipodes
    std::vector<Facet> facets;

    std::size_t point_count() const noexcept { return 2 * m; }
    std::span<const double> vertex(std::size_t id) const noexcept { return {coords.data() + id * n, n}; }
    int antipode(int id) const noexcept
    {
        const int mm = static_cast<int>(m);
        return id < mm ? id + mm : id - mm;
    }

    /// Vertex coordinates of facet f as spans.
    std::vector<std::span<const double>> facet_vertices(std::size_t f) const
    {
        std::vector<std::span<const double>> out;
        out.reserve(n);
        for (int id : facets[f].vertex_ids) {
            out.push_back(vertex(static_cast<std::size_t>(id)));
        }
        return out;
    }
};

/// Sorted vertex-id tuple packed into 256 bits, 16 bits per id. Ordering is
/// lexicographic on the tuple.
struct PackedKey
{
    std::array<std::uint64_t, 4> words{};

    static constexpr std::size_t kMaxIds = 16;
    static constexpr int kMaxId = 0xFFFF;

    template <typename It>
    static PackedKey from_sorted(It first, It last)
    {
        PackedKey key;
        std::size_t pos = 0;
        for (; first != last; ++first, ++pos) {
            const auto id = static_cast<std::uint64_t>(*first) + 1; // 0 marks an empty slot
            key.words[pos / 4] |= id << (48 - 16 * (pos % 4));
        }
        return key;
    }

    friend auto operator<=>(const PackedKey&, const PackedKey&) = default;
};

namespace detail {

inline std::size_t factorial(std::size_t k)
{
    std::size_t f = 1;
    for (std::size_t i = 2; i <= k; ++i) {
        f *= i;
    }
    return f;
}

/// (k)-volume of the simplex spanned by `vertices` (k + 1 points in R^n)
/// from the Gram determinant of its edge vectors.
inline double simplex_volume_gram(std::span<const std::span<const double>> vertices)
{
    const std::size_t k = vertices.size() - 1;
    if (k == 0) {
        return 1.0;
    }
    const std::size_t n = vertices.front().size();
    std::vector<double> edges(k * n);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t c = 0; c < n; ++c) {
            edges[i * n + c] = vertices[i + 1][c] - vertices[0][c];
        }
    }
    Matrix gram(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double g = dot({edges.data() + i * n, n}, {edges.data() + j * n, n});
            gram(i, j) = g;
            gram(j, i) = g;
        }
    }
    const double det = determinant(std::move(gram));
    return std::sqrt(std::max(det, 0.0)) / static_cast<double>(factorial(k));
}

class HullBuilder
{
public:
    HullBuilder(std::span<const double> coords, std::size_t n, double tol)
        : coords_(coords), n_(n), count_(coords.size() / n)
    {
        double scale = 0.0;
        for (std::size_t i = 0; i < count_; ++i) {
            scale = std::max(scale, norm(point(i)));
        }
        scale_ = scale;
        tol_ = tol * std::max(scale, 1.0);
    }

    /// Runs the construction; returns the sorted vertex-id tuples and unit
    /// normals of the final facets.
    void run()
    {
        build_initial_simplex();
        while (!pending_.empty()) {
            const int f = pending_.back();
            pending_.pop_back();
            if (!alive_[f] || outside_[f].empty()) {
                continue;
            }
            insert_point(f);
        }
        check_simplicial();
    }

    std::size_t dim() const noexcept { return n_; }

    template <typename Fn>
    void for_each_facet(Fn&& fn) const
    {
        for (std::size_t f = 0; f < alive_.size(); ++f) {
            if (alive_[f]) {
                fn(std::span<const int>(verts_.data() + f * n_, n_), std::span<const double>(normal_.data() + f * n_, n_));
            }
        }
    }

private:
    std::span<const double> point(std::size_t i) const noexcept { return {coords_.data() + i * n_, n_}; }
    std::span<const int> verts(int f) const noexcept { return {verts_.data() + static_cast<std::size_t>(f) * n_, n_}; }
    std::span<int> verts(int f) noexcept { return {verts_.data() + static_cast<std::size_t>(f) * n_, n_}; }
    std::span<int> nbrs(int f) noexcept { return {nbrs_.data() + static_cast<std::size_t>(f) * n_, n_}; }

    double signed_dist(int f, std::size_t p) const noexcept
    {
        const double* u = normal_.data() + static_cast<std::size_t>(f) * n_;
        const double* x = coords_.data() + p * n_;
        double s = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
            s += u[k] * (x[k] - center_[k]);
        }
        return s - offset_[f];
    }

    int allocate_facet()
    {
        if (!free_.empty()) {
            const int f = free_.back();
            free_.pop_back();
            alive_[f] = 1;
            outside_[f].clear();
            return f;
        }
        const int f = static_cast<int>(alive_.size());
        verts_.resize(verts_.size() + n_);
        nbrs_.resize(nbrs_.size() + n_);
        normal_.resize(normal_.size() + n_);
        offset_.push_back(0.0);
        alive_.push_back(1);
        round_.push_back(0);
        visible_.push_back(0);
        outside_.emplace_back();
        return f;
    }

    // Plane through the facet's vertices, oriented away from the interior
    // reference point: solve <a, v_i - c> = 1, normal = a/|a|, offset 1/|a|.
    void compute_plane(int f)
    {
        const auto vs = verts(f);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto p = point(static_cast<std::size_t>(vs[i]));
            for (std::size_t k = 0; k < n_; ++k) {
                scratch_a_[i * n_ + k] = p[k] - center_[k];
            }
            scratch_b_[i] = 1.0;
        }
        if (!solve_in_place(scratch_a_, scratch_b_, n_, 1e-14 * std::max(scale_, 1.0))) {
            throw degenerate_error("degenerate: perturbation required (facet plane through the interior point)");
        }
        const double len = norm(scratch_b_);
        double* u = normal_.data() + static_cast<std::size_t>(f) * n_;
        for (std::size_t k = 0; k < n_; ++k) {
            u[k] = scratch_b_[k] / len;
        }
        offset_[f] = 1.0 / len;
    }

    // n + 1 vertices within tolerance of one hyperplane show up as two
    // adjacent facets, one containing the other's opposite vertex.
    void check_simplicial() const
    {
        for (std::size_t f = 0; f < alive_.size(); ++f) {
            if (!alive_[f]) {
                continue;
            }
            const auto vf = verts(static_cast<int>(f));
            for (std::size_t s = 0; s < n_; ++s) {
                const int g = nbrs_[f * n_ + s];
                for (int v : verts(g)) {
                    if (std::find(vf.begin(), vf.end(), v) == vf.end() &&
                        signed_dist(static_cast<int>(f), static_cast<std::size_t>(v)) >= -tol_) {
                        throw degenerate_error(
                            "degenerate: perturbation required (n + 1 points on one facet hyperplane)");
                    }
                }
            }
        }
    }

    void build_initial_simplex()
    {
        if (n_ < 2) {
            throw domain_error("hull: dimension must be >= 2");
        }
        if (n_ > PackedKey::kMaxIds || count_ > static_cast<std::size_t>(PackedKey::kMaxId)) {
            throw domain_error("hull: at most 16 dimensions and 65535 points are supported");
        }
        if (count_ < n_ + 1) {
            throw degenerate_error("degenerate: points do not span (fewer than n + 1 points)");
        }
        scratch_a_.assign(n_ * n_, 0.0);
        scratch_b_.assign(n_, 0.0);

        // Greedy simplex: start from the longest vector, then repeatedly take
        // the point furthest from the affine hull chosen so far.
        std::vector<std::size_t> chosen;
        std::size_t first = 0;
        for (std::size_t i = 1; i < count_; ++i) {
            if (norm(point(i)) > norm(point(first))) {
                first = i;
            }
        }
        chosen.push_back(first);
        std::vector<Vector> basis;
        const auto base = point(first);
        const double span_tol = kCoplanarTol * std::max(scale_, 1.0);
        while (chosen.size() < n_ + 1) {
            double best = -1.0;
            std::size_t best_i = 0;
            Vector best_r;
            for (std::size_t i = 0; i < count_; ++i) {
                Vector r(n_);
                for (std::size_t k = 0; k < n_; ++k) {
                    r[k] = point(i)[k] - base[k];
                }
                for (const auto& b : basis) {
                    const double c = dot(r, b);
                    for (std::size_t k = 0; k < n_; ++k) {
                        r[k] -= c * b[k];
                    }
                }
                const double len = norm(r);
                if (len > best) {
                    best = len;
                    best_i = i;
                    best_r = std::move(r);
                }
            }
            if (best <= span_tol) {
                throw degenerate_error("degenerate: points do not span R^" + std::to_string(n_));
            }
            for (auto& x : best_r) {
                x /= best;
            }
            // one more Gram-Schmidt pass for orthogonality
            for (const auto& b : basis) {
                const double c = dot(best_r, b);
                for (std::size_t k = 0; k < n_; ++k) {
                    best_r[k] -= c * b[k];
                }
            }
            const double len = norm(best_r);
            for (auto& x : best_r) {
                x /= len;
            }
            basis.push_back(std::move(best_r));
            chosen.push_back(best_i);
        }

        center_.assign(n_, 0.0);
        for (std::size_t id : chosen) {
            for (std::size_t k = 0; k < n_; ++k) {
                center_[k] += point(id)[k] / static_cast<double>(n_ + 1);
            }
        }

        // Facet j omits simplex vertex j; its neighbour across the ridge
        // opposite vertex slot s is the facet omitting that vertex.
        std::vector<int> ids(n_ + 1);
        for (std::size_t j = 0; j <= n_; ++j) {
            ids[j] = allocate_facet();
        }
        for (std::size_t j = 0; j <= n_; ++j) {
            std::size_t slot = 0;
            for (std::size_t i = 0; i <= n_; ++i) {
                if (i == j) {
                    continue;
                }
                verts(ids[j])[slot] = static_cast<int>(chosen[i]);
                nbrs(ids[j])[slot] = ids[i];
                ++slot;
            }
            compute_plane(ids[j]);
        }

        std::vector<char> in_simplex(count_, 0);
        for (std::size_t id : chosen) {
            in_simplex[id] = 1;
        }
        for (std::size_t p = 0; p < count_; ++p) {
            if (!in_simplex[p]) {
                assign_outside(static_cast<int>(p), ids);
            }
        }
        for (auto it = ids.rbegin(); it != ids.rend(); ++it) {
            if (!outside_[*it].empty()) {
                pending_.push_back(*it);
            }
        }
    }

    // Adds p to the outside set of the first candidate facet it sees. The
    // furthest point of each set is kept at the front.
    void assign_outside(int p, std::span<const int> candidates)
    {
        for (int f : candidates) {
            const double d = signed_dist(f, static_cast<std::size_t>(p));
            if (d > tol_) {
                auto& out = outside_[f];
                out.push_back(p);
                if (out.size() == 1 || d > signed_dist(f, static_cast<std::size_t>(out.front()))) {
                    std::swap(out.front(), out.back());
                }
                return;
            }
        }
    }

    void insert_point(int start)
    {
        const int apex = outside_[start].front();
        ++stamp_;

        // Visible region: connected set of facets that see the apex.
        visible_list_.clear();
        horizon_.clear();
        visible_list_.push_back(start);
        round_[start] = stamp_;
        visible_[start] = 1;
        for (std::size_t head = 0; head < visible_list_.size(); ++head) {
            const int f = visible_list_[head];
            for (std::size_t s = 0; s < n_; ++s) {
                const int g = nbrs(f)[s];
                if (round_[g] != stamp_) {
                    round_[g] = stamp_;
                    const double d = signed_dist(g, static_cast<std::size_t>(apex));
                    // A coplanar neighbour stays; the cone facet triangulates
                    // its hyperplane and check_simplicial() rejects it if it
                    // survives to the end.
                    visible_[g] = d > tol_ ? 1 : 0;
                    if (visible_[g]) {
                        visible_list_.push_back(g);
                    }
                }
                if (!visible_[g]) {
                    horizon_.push_back({f, static_cast<int>(s), g});
                }
            }
        }

        // Cone every horizon ridge to the apex.
        new_facets_.clear();
        for (const auto& h : horizon_) {
            const int nf = allocate_facet();
            std::copy_n(verts(h.facet).begin(), n_, verts(nf).begin());
            verts(nf)[h.slot] = apex;
            nbrs(nf)[h.slot] = h.neighbour;
            for (auto& back : nbrs(h.neighbour)) {
                if (back == h.facet) {
                    back = nf;
                }
            }
            new_facets_.push_back(nf);
            apex_slot_.resize(new_facets_.size());
            apex_slot_.back() = h.slot;
        }

        // New facets meet each other across ridges through the apex.
        ridge_links_.clear();
        std::array<int, PackedKey::kMaxIds> tmp{};
        for (std::size_t i = 0; i < new_facets_.size(); ++i) {
            const int nf = new_facets_[i];
            for (std::size_t s = 0; s < n_; ++s) {
                if (static_cast<int>(s) == apex_slot_[i]) {
                    continue;
                }
                std::size_t k = 0;
                for (std::size_t t = 0; t < n_; ++t) {
                    if (t != s) {
                        tmp[k++] = verts(nf)[t];
                    }
                }
                std::sort(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(k));
                ridge_links_.push_back({PackedKey::from_sorted(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(k)), nf,
                                        static_cast<int>(s)});
            }
        }
        link_ridges();

        for (int nf : new_facets_) {
            compute_plane(nf);
        }

        // Hand the orphaned outside points to the new facets.
        for (int f : visible_list_) {
            alive_[f] = 0;
            visible_[f] = 0;
            for (int p : outside_[f]) {
                if (p != apex) {
                    assign_outside(p, new_facets_);
                }
            }
            outside_[f].clear();
            outside_[f].shrink_to_fit();
        }
        free_.insert(free_.end(), visible_list_.begin(), visible_list_.end());
        for (auto it = new_facets_.rbegin(); it != new_facets_.rend(); ++it) {
            if (!outside_[*it].empty()) {
                pending_.push_back(*it);
            }
        }
    }

    static std::uint64_t hash_key(const PackedKey& k) noexcept
    {
        std::uint64_t h = 0;
        for (auto w : k.words) {
            h = avalanche(h ^ w);
        }
        return h;
    }

    // Pairs up the new facets' apex ridges through an open-addressing table.
    // Every ridge key must occur exactly twice.
    void link_ridges()
    {
        std::size_t cap = 16;
        while (cap < 2 * ridge_links_.size()) {
            cap *= 2;
        }
        table_.assign(cap, -1);
        std::size_t matched = 0;
        for (std::size_t i = 0; i < ridge_links_.size(); ++i) {
            const auto& link = ridge_links_[i];
            std::size_t pos = hash_key(link.key) & (cap - 1);
            for (;;) {
                int& slot = table_[pos];
                if (slot == -1) {
                    slot = static_cast<int>(i);
                    break;
                }
                if (slot >= 0 && ridge_links_[static_cast<std::size_t>(slot)].key == link.key) {
                    const auto& other = ridge_links_[static_cast<std::size_t>(slot)];
                    nbrs(link.facet)[link.slot] = other.facet;
                    nbrs(other.facet)[other.slot] = link.facet;
                    slot = -2; // matched; a third occurrence lands in a fresh slot and stays unmatched
                    ++matched;
                    break;
                }
                pos = (pos + 1) & (cap - 1);
            }
        }
        if (2 * matched != ridge_links_.size()) {
            throw degenerate_error("degenerate: perturbation required (horizon is not a closed ridge cycle)");
        }
    }

    struct HorizonEntry
    {
        int facet;
        int slot;
        int neighbour;
    };

    struct RidgeLink
    {
        PackedKey key;
        int facet;
        int slot;
    };

    std::span<const double> coords_;
    std::size_t n_;
    std::size_t count_;
    double scale_ = 1.0;
    double tol_ = kCoplanarTol;
    Vector center_;

    std::vector<int> verts_;
    std::vector<int> nbrs_;
    std::vector<double> normal_;
    std::vector<double> offset_;
    std::vector<char> alive_;
    std::vector<std::uint32_t> round_;
    std::vector<char> visible_;
    std::vector<std::vector<int>> outside_;
    std::vector<int> free_;
    std::vector<int> pending_;
    std::uint32_t stamp_ = 0;

    std::vector<int> visible_list_;
    std::vector<HorizonEntry> horizon_;
    std::vector<int> new_facets_;
    std::vector<int> apex_slot_;
    std::vector<RidgeLink> ridge_links_;
    std::vector<int> table_;
    std::vector<double> scratch_a_;
    std::vector<double> scratch_b_;
};

} // namespace detail

/// Convex hull of an arbitrary point table (count x n), as a facet complex
/// whose table is exactly `coords`. The origin must be interior.
/// `m` sets the antipode convention; pass coords.size() / n / 2 for
/// symmetrized tables.
inline FacetComplex hull_of_table(std::vector<double> coords, std::size_t n, std::size_t m, std::uint64_t seed = 0)
{
    detail::HullBuilder builder(coords, n, kCoplanarTol);
    builder.run();

    FacetComplex fc;
    fc.n = n;
    fc.m = m;
    fc.seed = seed;
    fc.coords = std::move(coords);
    builder.for_each_facet([&](std::span<const int> ids, std::span<const double> normal) {
        Facet f;
        f.vertex_ids.assign(ids.begin(), ids.end());
        std::sort(f.vertex_ids.begin(), f.vertex_ids.end());
        f.normal.assign(normal.begin(), normal.end());
        fc.facets.push_back(std::move(f));
    });
    std::sort(fc.facets.begin(), fc.facets.end(),
              [](const Facet& a, const Facet& b) { return a.vertex_ids < b.vertex_ids; });

    for (auto& f : fc.facets) {
        const auto vs = [&] {
            std::vector<std::span<const double>> out;
            for (int id : f.vertex_ids) {
                out.push_back(fc.vertex(static_cast<std::size_t>(id)));
            }
            return out;
        }();
        double d = 0.0;
        for (const auto& v : vs) {
            d += dot(v, f.normal);
        }
        f.dist = d / static_cast<double>(n);
        if (!(f.dist > kCoplanarTol)) {
            throw degenerate_error("degenerate: origin is not interior to the hull");
        }
        f.volume = detail::simplex_volume_gram(vs);
    }
    return fc;
}

/// Facet complex of conv{+-P_1, ..., +-P_m}. Points need not be unit.
inline FacetComplex symmetric_hull(const PointCloud& cloud)
{
    if (cloud.n < 2) {
        throw domain_error("symmetric_hull: n must be >= 2");
    }
    std::vector<double> table(2 * cloud.m * cloud.n);
    std::copy(cloud.coords.begin(), cloud.coords.end(), table.begin());
    for (std::size_t i = 0; i < cloud.m * cloud.n; ++i) {
        table[cloud.m * cloud.n + i] = -cloud.coords[i];
    }
    auto fc = hull_of_table(std::move(table), cloud.n, cloud.m, cloud.seed);

    // A unit point of K lies on the sphere, hence is an extreme point; one that
    // is not a vertex sits on a facet it does not span.
    if (cloud.all_unit(1e-9)) {
        std::vector<char> used(fc.point_count(), 0);
        for (const auto& f : fc.facets) {
            for (int id : f.vertex_ids) {
                used[static_cast<std::size_t>(id)] = 1;
            }
        }
        if (std::find(used.begin(), used.end(), 0) != used.end()) {
            throw degenerate_error("degenerate: perturbation required (a sphere point is not a hull vertex)");
        }
    }
    return fc;
}

inline double inradius(const FacetComplex& fc)
{
    if (fc.facets.empty()) {
        throw domain_error("inradius: empty facet list");
    }
    double r = std::numeric_limits<double>::infinity();
    for (const auto& f : fc.facets) {
        r = std::min(r, f.dist);
    }
    return r;
}

struct CheckResult
{
    std::string name;
    bool passed = true;
    std::vector<std::size_t> offenders; // facet or point indices, per check
    std::vector<std::vector<int>> tuples; // offending vertex-id tuples
    std::string detail;
};

struct ValidationReport
{
    std::vector<CheckResult> checks;

    bool ok() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }

    const CheckResult& get(const std::string& name) const
    {
        for (const auto& c : checks) {
            if (c.name == name) {
                return c;
            }
        }
        throw domain_error("no check named " + name);
    }
};

/// Checks every FacetComplex invariant:
///   vertex_on_plane    <v, normal> = dist within tol for facet vertices
///   unit_normal        |normal| = 1
///   distinct_vertices  n distinct ids, no antipodal pair
///   origin_distance    dist > 0, and dist <= 1 when the table is unit
///   ridge_sharing      each (n-2)-face lies in exactly two facets
///   central_symmetry   antipodal facet present with negated normal
///   containment        every table point lies beneath the plane through the
///                      facet's vertices, within tol
inline ValidationReport validate_complex(const FacetComplex& fc, double tol = kCoplanarTol)
{
    ValidationReport report;
    const std::size_t n = fc.n;
    const std::size_t nf = fc.facets.size();

    bool unit_table = true;
    for (std::size_t i = 0; i < fc.point_count(); ++i) {
        if (std::abs(norm(fc.vertex(i)) - 1.0) > 1e-9) {
            unit_table = false;
            break;
        }
    }

    CheckResult on_plane;
    on_plane.name = "vertex_on_plane";
    CheckResult unit_normal;
    unit_normal.name = "unit_normal";
    CheckResult distinct;
    distinct.name = "distinct_vertices";
    CheckResult origin;
    origin.name = "origin_distance";
    for (std::size_t f = 0; f < nf; ++f) {
        const auto& facet = fc.facets[f];
        if (facet.vertex_ids.size() != n || facet.normal.size() != n) {
            distinct.offenders.push_back(f);
            continue;
        }
        if (std::abs(norm(facet.normal) - 1.0) > tol) {
            unit_normal.offenders.push_back(f);
        }
        for (int id : facet.vertex_ids) {
            if (std::abs(dot(fc.vertex(static_cast<std::size_t>(id)), facet.normal) - facet.dist) > tol) {
                on_plane.offenders.push_back(f);
                break;
            }
        }
        auto ids = facet.vertex_ids;
        std::sort(ids.begin(), ids.end());
        bool bad = std::adjacent_find(ids.begin(), ids.end()) != ids.end();
        for (int id : ids) {
            bad = bad || std::binary_search(ids.begin(), ids.end(), fc.antipode(id));
        }
        if (bad) {
            distinct.offenders.push_back(f);
        }
        if (!(facet.dist > 0.0) || (unit_table && facet.dist > 1.0 + tol)) {
            origin.offenders.push_back(f);
        }
    }

    // Ridge sharing via sorted ridge keys.
    CheckResult ridges;
    ridges.name = "ridge_sharing";
    {
        std::vector<std::pair<PackedKey, std::size_t>> keys;
        keys.reserve(nf * n);
        std::vector<int> tmp(n);
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& ids = fc.facets[f].vertex_ids;
            if (ids.size() != n) {
                continue;
            }
            auto sorted = ids;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t skip = 0; skip < n; ++skip) {
                std::size_t k = 0;
                for (std::size_t t = 0; t < n; ++t) {
                    if (t != skip) {
                        tmp[k++] = sorted[t];
                    }
                }
                keys.emplace_back(PackedKey::from_sorted(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(n - 1)), f);
            }
        }
        std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
            return a.first < b.first || (a.first == b.first && a.second < b.second);
        });
        for (std::size_t i = 0; i < keys.size();) {
            std::size_t j = i;
            while (j < keys.size() && keys[j].first == keys[i].first) {
                ++j;
            }
            if (j - i != 2) {
                // recover the ridge tuple from its first facet
                const auto& ids = fc.facets[keys[i].second].vertex_ids;
                std::vector<int> ridge;
                for (std::size_t t = 0; t < n; ++t) {
                    auto candidate = ids;
                    std::sort(candidate.begin(), candidate.end());
                    candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(t));
                    if (PackedKey::from_sorted(candidate.begin(), candidate.end()) == keys[i].first) {
                        ridge = std::move(candidate);
                        break;
                    }
                }
                ridges.tuples.push_back(std::move(ridge));
                for (std::size_t k = i; k < j; ++k) {
                    ridges.offenders.push_back(keys[k].second);
                }
            }
            i = j;
        }
        if (!ridges.tuples.empty()) {
            ridges.detail = std::to_string(ridges.tuples.size()) + " ridge(s) not shared by exactly two facets";
        }
    }

    CheckResult symmetry;
    symmetry.name = "central_symmetry";
    {
        std::vector<std::pair<PackedKey, std::size_t>> keys;
        keys.reserve(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            auto ids = fc.facets[f].vertex_ids;
            std::sort(ids.begin(), ids.end());
            keys.emplace_back(PackedKey::from_sorted(ids.begin(), ids.end()), f);
        }
        std::sort(keys.begin(), keys.end());
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& facet = fc.facets[f];
            std::vector<int> anti;
            for (int id : facet.vertex_ids) {
                anti.push_back(fc.antipode(id));
            }
            std::sort(anti.begin(), anti.end());
            const auto key = PackedKey::from_sorted(anti.begin(), anti.end());
            const auto it = std::lower_bound(keys.begin(), keys.end(), std::make_pair(key, std::size_t{0}));
            bool found = false;
            if (it != keys.end() && it->first == key) {
                const auto& other = fc.facets[it->second];
                found = other.normal.size() == n && std::abs(other.dist - facet.dist) <= tol;
                for (std::size_t k = 0; found && k < n; ++k) {
                    found = std::abs(other.normal[k] + facet.normal[k]) <= tol;
                }
            }
            if (!found) {
                symmetry.offenders.push_back(f);
            }
        }
    }

    CheckResult containment;
    containment.name = "containment";
    {
        std::vector<char> bad(fc.point_count(), 0);
        for (const auto& facet : fc.facets) {
            if (facet.normal.size() != n || facet.vertex_ids.empty()) {
                continue;
            }
            // plane through the facet's own vertices, independent of dist
            double offset = 0.0;
            for (int id : facet.vertex_ids) {
                offset += dot(fc.vertex(static_cast<std::size_t>(id)), facet.normal);
            }
            const double limit = offset / static_cast<double>(facet.vertex_ids.size()) + tol;
            const double* x = fc.coords.data();
            const double* u = facet.normal.data();
            for (std::size_t p = 0; p < fc.point_count(); ++p, x += n) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    s += x[k] * u[k];
                }
                if (s > limit) {
                    bad[p] = 1;
                }
            }
        }
        for (std::size_t p = 0; p < bad.size(); ++p) {
            if (bad[p]) {
                containment.offenders.push_back(p);
            }
        }
    }

    for (auto* c : {&on_plane, &unit_normal, &distinct, &origin, &ridges, &symmetry, &containment}) {
        c->passed = c->offenders.empty() && c->tuples.empty();
        report.checks.push_back(std::move(*c));
    }
    if (nf == 0) {
        report.checks.push_back({"non_empty", false, {}, {}, "complex has no facets"});
    }
    return report;
}

/// Plain-text dump: "n rows facet_count", then one coordinate row per table
/// point, then one row of vertex ids per facet.
inline void write_off(const FacetComplex& fc, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw io_error(path, "cannot open for writing");
    }
    out << fc.n << ' ' << fc.point_count() << ' ' << fc.facets.size() << '\n';
    out << std::setprecision(17);
    for (std::size_t p = 0; p < fc.point_count(); ++p) {
        const auto v = fc.vertex(p);
        for (std::size_t k = 0; k < fc.n; ++k) {
            out << (k ? " " : "") << v[k];
        }
        out << '\n';
    }
    for (const auto& f : fc.facets) {
        for (std::size_t k = 0; k < f.vertex_ids.size(); ++k) {
            out << (k ? " " : "") << f.vertex_ids[k];
        }
        out << '\n';
    }
    if (!out) {
        throw io_error(path, "write failed");
    }
}

} // namespace isohull
