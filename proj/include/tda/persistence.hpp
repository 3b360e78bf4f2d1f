#pragma once

#include <array>
#include <limits>
#include <vector>

#include "tda/dates.hpp"
#include "tda/embedding.hpp"

namespace tda {

// Symmetric Euclidean distances, zero diagonal, stored dense.
class DistanceMatrix {
  public:
    explicit DistanceMatrix(int n) : n_(n), entries_(static_cast<size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double at(int i, int j) const { return entries_[static_cast<size_t>(i) * n_ + j]; }
    void set(int i, int j, double v) {
        entries_[static_cast<size_t>(i) * n_ + j] = v;
        entries_[static_cast<size_t>(j) * n_ + i] = v;
    }

  private:
    int n_;
    std::vector<double> entries_;
};

DistanceMatrix distance_matrix(const PointCloud& cloud);

// Largest pairwise distance; the default filtration threshold. At this value
// the complex contains every edge, so no 1-cycle survives.
double enclosing_threshold(const DistanceMatrix& dm);

// Unused vertex slots hold -1; used slots are strictly increasing.
struct Simplex {
    std::array<int, 3> v{-1, -1, -1};
    int dim = 0;
    double value = 0.0;
};

// Total order (value, dim, vertices). Faces sort strictly before cofaces:
// a face's value is <= by the flag rule and its dim is smaller.
bool simplex_less(const Simplex& a, const Simplex& b);

struct RipsFiltration {
    int vertex_count = 0;
    std::vector<Simplex> simplices;
};

// Flag complex up to max_dim (<= 2): every simplex whose pairwise distances
// are all <= threshold, valued at its largest pairwise distance.
RipsFiltration build_rips(const DistanceMatrix& dm, int max_dim, double threshold);

// Explicit face-ordering check, O(m) map lookups. The builder's sort makes
// this hold by construction; tests call it on hand-made filtrations.
bool validate_faces(const RipsFiltration& filt);

struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = std::numeric_limits<double>::infinity();

    bool essential() const { return death == std::numeric_limits<double>::infinity(); }
    double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;  // sorted by (dim, birth, death)
    Date date;

    std::vector<PersistencePair> dimension(int dim) const;
};

// GF(2) reduction: union-find for H0, column reduction of triangle
// boundaries for H1. Pairs with birth == death are dropped; classes alive at
// the threshold get death = infinity. Requires a sorted filtration.
PersistenceDiagram compute_persistence(const RipsFiltration& filt);

// Textbook dense reduction over the full boundary matrix, no shortcuts.
// Refuses more than 10 vertices; exists to check compute_persistence.
PersistenceDiagram oracle_persistence(const RipsFiltration& filt);

}  // namespace tda
