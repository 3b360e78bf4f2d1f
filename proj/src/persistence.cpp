#include "tda/persistence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "tda/errors.hpp"

namespace tda {

DistanceMatrix distance_matrix(const PointCloud& cloud) {
    const int n = cloud.size();
    if (n == 0) throw ParameterError("cannot build a distance matrix from an empty cloud");
    DistanceMatrix dm(n);
    for (int i = 0; i < n; ++i) {
        const double* a = cloud.point(i);
        for (int j = i + 1; j < n; ++j) {
            const double* b = cloud.point(j);
            double s = 0.0;
            for (int k = 0; k < cloud.d; ++k) {
                const double diff = a[k] - b[k];
                s += diff * diff;
            }
            dm.set(i, j, std::sqrt(s));
        }
    }
    return dm;
}

double enclosing_threshold(const DistanceMatrix& dm) {
    double m = 0.0;
    for (int i = 0; i < dm.size(); ++i)
        for (int j = i + 1; j < dm.size(); ++j) m = std::max(m, dm.at(i, j));
    return m;
}

bool simplex_less(const Simplex& a, const Simplex& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.v < b.v;
}

RipsFiltration build_rips(const DistanceMatrix& dm, int max_dim, double threshold) {
    if (max_dim < 0 || max_dim > 2)
        throw ParameterError("max_dim must be 0, 1 or 2, got " + std::to_string(max_dim));
    if (!(threshold >= 0.0) || !std::isfinite(threshold))
        throw ParameterError("threshold must be finite and >= 0");

    const int n = dm.size();
    RipsFiltration filt;
    filt.vertex_count = n;
    auto& s = filt.simplices;
    for (int i = 0; i < n; ++i) s.push_back({{i, -1, -1}, 0, 0.0});
    if (max_dim >= 1) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (dm.at(i, j) <= threshold) s.push_back({{i, j, -1}, 1, dm.at(i, j)});
    }
    if (max_dim >= 2) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (dm.at(i, j) > threshold) continue;
                for (int k = j + 1; k < n; ++k) {
                    const double m =
                        std::max(dm.at(i, j), std::max(dm.at(i, k), dm.at(j, k)));
                    if (m <= threshold) s.push_back({{i, j, k}, 2, m});
                }
            }
    }
    std::sort(s.begin(), s.end(), simplex_less);
    return filt;
}

bool validate_faces(const RipsFiltration& filt) {
    const auto& s = filt.simplices;
    for (size_t i = 1; i < s.size(); ++i)
        if (simplex_less(s[i], s[i - 1])) return false;

    // Position of each simplex keyed by its vertex tuple, per dimension.
    std::vector<std::array<int, 3>> seen[3];
    std::vector<size_t> pos[3];
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i].dim < 0 || s[i].dim > 2) return false;
        seen[s[i].dim].push_back(s[i].v);
        pos[s[i].dim].push_back(i);
    }
    auto find_before = [&](int dim, std::array<int, 3> key, size_t limit) {
        for (size_t i = 0; i < seen[dim].size(); ++i)
            if (seen[dim][i] == key && pos[dim][i] < limit) return true;
        return false;
    };
    for (size_t i = 0; i < s.size(); ++i) {
        const auto& sx = s[i];
        if (sx.dim == 1) {
            if (!find_before(0, {sx.v[0], -1, -1}, i)) return false;
            if (!find_before(0, {sx.v[1], -1, -1}, i)) return false;
        } else if (sx.dim == 2) {
            if (!find_before(1, {sx.v[0], sx.v[1], -1}, i)) return false;
            if (!find_before(1, {sx.v[0], sx.v[2], -1}, i)) return false;
            if (!find_before(1, {sx.v[1], sx.v[2], -1}, i)) return false;
        }
    }
    return true;
}

std::vector<PersistencePair> PersistenceDiagram::dimension(int dim) const {
    std::vector<PersistencePair> out;
    for (const auto& p : pairs)
        if (p.dim == dim) out.push_back(p);
    return out;
}

namespace {

void sort_pairs(std::vector<PersistencePair>& pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
        if (a.dim != b.dim) return a.dim < b.dim;
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.death < b.death;
    });
}

// Symmetric difference of sorted index vectors: GF(2) column addition.
void xor_into(std::vector<int>& dst, const std::vector<int>& src, std::vector<int>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(dst.begin(), dst.end(), src.begin(), src.end(),
                                  std::back_inserter(scratch));
    dst.swap(scratch);
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
};

}  // namespace

PersistenceDiagram compute_persistence(const RipsFiltration& filt) {
    const auto& s = filt.simplices;
    for (size_t i = 1; i < s.size(); ++i)
        if (simplex_less(s[i], s[i - 1]))
            throw ParameterError("filtration is not sorted");

    const int n = filt.vertex_count;
    // Vertex births; -infinity marks an absent vertex id.
    std::vector<double> vertex_value(static_cast<size_t>(n),
                                     -std::numeric_limits<double>::infinity());
    struct Edge {
        int a, b;
        double value;
    };
    std::vector<Edge> edges;
    std::vector<const Simplex*> triangles;
    for (const auto& sx : s) {
        if (sx.dim == 0) {
            if (sx.v[0] < 0 || sx.v[0] >= n)
                throw ParameterError("vertex id out of range");
            vertex_value[sx.v[0]] = sx.value;
        } else if (sx.dim == 1) {
            edges.push_back({sx.v[0], sx.v[1], sx.value});
        } else {
            triangles.push_back(&sx);
        }
    }

    PersistenceDiagram out;

    // H0: an edge joining two components kills the younger one. All classes
    // born at their vertex's filtration value (0 for a Rips filtration).
    UnionFind uf(n);
    std::vector<int> birth_vertex(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) birth_vertex[i] = i;
    auto vertex_older = [&](int a, int b) {
        if (vertex_value[a] != vertex_value[b]) return vertex_value[a] < vertex_value[b];
        return a < b;
    };
    std::vector<char> edge_creator(edges.size(), 0);
    for (size_t e = 0; e < edges.size(); ++e) {
        const auto& ed = edges[e];
        if (ed.a < 0 || ed.a >= n || ed.b < 0 || ed.b >= n ||
            vertex_value[ed.a] > ed.value || vertex_value[ed.b] > ed.value ||
            std::isinf(vertex_value[ed.a]) || std::isinf(vertex_value[ed.b]))
            throw ParameterError("edge appears before one of its vertices");
        const int ra = uf.find(ed.a);
        const int rb = uf.find(ed.b);
        if (ra == rb) {
            edge_creator[e] = 1;
            continue;
        }
        const bool a_older = vertex_older(birth_vertex[ra], birth_vertex[rb]);
        const int survivor = a_older ? ra : rb;
        const int dying = a_older ? rb : ra;
        const double birth = vertex_value[birth_vertex[dying]];
        if (birth != ed.value) out.pairs.push_back({0, birth, ed.value});
        uf.parent[dying] = survivor;
    }
    for (int i = 0; i < n; ++i) {
        if (std::isinf(vertex_value[i])) continue;
        if (uf.find(i) == i)
            out.pairs.push_back({0, vertex_value[i], std::numeric_limits<double>::infinity()});
    }

    // H1: reduce triangle boundaries over edge rows. A nonzero reduced
    // column's pivot edge is the cycle's creator; it dies at the triangle.
    std::vector<int> edge_index;
    if (!triangles.empty()) {
        edge_index.assign(static_cast<size_t>(n) * n, -1);
        for (size_t e = 0; e < edges.size(); ++e)
            edge_index[static_cast<size_t>(edges[e].a) * n + edges[e].b] = static_cast<int>(e);
    }
    auto edge_at = [&](int a, int b, double limit) {
        const int idx = edge_index[static_cast<size_t>(a) * n + b];
        if (idx < 0 || edges[static_cast<size_t>(idx)].value > limit)
            throw ParameterError("triangle appears before one of its edges");
        return idx;
    };
    std::vector<int> pivot_owner(edges.size(), -1);
    std::vector<std::vector<int>> cols;
    cols.reserve(triangles.size());
    std::vector<char> edge_killed(edges.size(), 0);
    std::vector<int> col, scratch;
    for (const Simplex* t : triangles) {
        col = {edge_at(t->v[0], t->v[1], t->value), edge_at(t->v[0], t->v[2], t->value),
               edge_at(t->v[1], t->v[2], t->value)};
        std::sort(col.begin(), col.end());
        while (!col.empty()) {
            const int owner = pivot_owner[static_cast<size_t>(col.back())];
            if (owner < 0) break;
            xor_into(col, cols[static_cast<size_t>(owner)], scratch);
        }
        if (col.empty()) {
            cols.emplace_back();
            continue;
        }
        const int pivot = col.back();
        pivot_owner[static_cast<size_t>(pivot)] = static_cast<int>(cols.size());
        if (!edge_creator[static_cast<size_t>(pivot)])
            throw std::logic_error("internal: reduction paired a non-creator edge");
        edge_killed[static_cast<size_t>(pivot)] = 1;
        if (edges[static_cast<size_t>(pivot)].value != t->value)
            out.pairs.push_back({1, edges[static_cast<size_t>(pivot)].value, t->value});
        cols.push_back(std::move(col));
        col.clear();
    }
    for (size_t e = 0; e < edges.size(); ++e)
        if (edge_creator[e] && !edge_killed[e])
            out.pairs.push_back({1, edges[e].value, std::numeric_limits<double>::infinity()});

    sort_pairs(out.pairs);
    return out;
}

PersistenceDiagram oracle_persistence(const RipsFiltration& filt) {
    if (filt.vertex_count > 10)
        throw ParameterError("oracle_persistence is for clouds of at most 10 points, got " +
                             std::to_string(filt.vertex_count));
    const auto& s = filt.simplices;
    for (size_t i = 1; i < s.size(); ++i)
        if (simplex_less(s[i], s[i - 1]))
            throw ParameterError("filtration is not sorted");

    const size_t m = s.size();
    const size_t words = (m + 63) / 64;
    auto low = [&](const std::vector<uint64_t>& col) -> int {
        for (size_t w = words; w-- > 0;)
            if (col[w]) return static_cast<int>(w * 64 + 63 - std::countl_zero(col[w]));
        return -1;
    };

    // Face lookup by (dim, vertex tuple).
    std::vector<std::pair<std::array<int, 4>, int>> index;
    index.reserve(m);
    for (size_t i = 0; i < m; ++i)
        index.push_back({{s[i].dim, s[i].v[0], s[i].v[1], s[i].v[2]}, static_cast<int>(i)});
    std::sort(index.begin(), index.end());
    auto find_simplex = [&](int dim, std::array<int, 3> v) {
        std::array<int, 4> key{dim, v[0], v[1], v[2]};
        auto it = std::lower_bound(index.begin(), index.end(), key,
                                   [](const auto& a, const auto& k) { return a.first < k; });
        if (it == index.end() || it->first != key)
            throw ParameterError("filtration is missing a face");
        return it->second;
    };

    std::vector<std::vector<uint64_t>> cols(m);
    std::vector<int> pivot_owner(m, -1);
    std::vector<char> creator(m, 0);
    std::vector<PersistencePair> pairs;
    for (size_t j = 0; j < m; ++j) {
        std::vector<uint64_t> col(words, 0);
        auto set_face = [&](int dim, std::array<int, 3> v) {
            const int f = find_simplex(dim, v);
            if (static_cast<size_t>(f) >= j) throw ParameterError("face does not precede coface");
            col[static_cast<size_t>(f) / 64] ^= uint64_t{1} << (f % 64);
        };
        if (s[j].dim == 1) {
            set_face(0, {s[j].v[0], -1, -1});
            set_face(0, {s[j].v[1], -1, -1});
        } else if (s[j].dim == 2) {
            set_face(1, {s[j].v[0], s[j].v[1], -1});
            set_face(1, {s[j].v[0], s[j].v[2], -1});
            set_face(1, {s[j].v[1], s[j].v[2], -1});
        }
        int p;
        while ((p = low(col)) >= 0 && pivot_owner[static_cast<size_t>(p)] >= 0) {
            const auto& other = cols[static_cast<size_t>(pivot_owner[static_cast<size_t>(p)])];
            for (size_t w = 0; w < words; ++w) col[w] ^= other[w];
        }
        if (p < 0) {
            creator[j] = 1;
        } else {
            pivot_owner[static_cast<size_t>(p)] = static_cast<int>(j);
            if (s[static_cast<size_t>(p)].dim <= 1 &&
                s[static_cast<size_t>(p)].value != s[j].value)
                pairs.push_back(
                    {s[static_cast<size_t>(p)].dim, s[static_cast<size_t>(p)].value, s[j].value});
        }
        cols[j] = std::move(col);
    }
    for (size_t i = 0; i < m; ++i)
        if (creator[i] && pivot_owner[i] < 0 && s[i].dim <= 1)
            pairs.push_back({s[i].dim, s[i].value, std::numeric_limits<double>::infinity()});

    sort_pairs(pairs);
    PersistenceDiagram out;
    out.pairs = std::move(pairs);
    return out;
}

}  // namespace tda
