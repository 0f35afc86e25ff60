#ifndef POLYMERLAB_CONE_HPP
#define POLYMERLAB_CONE_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace polymerlab {

inline constexpr int kMaxDim = 4;

using Coords = std::array<int, kMaxDim>;

// Sites reachable by the walk at a fixed time t: |x|_1 <= radius and
// |x|_1 == t (mod 2).  Layout is lexicographic in the first dim-1
// coordinates ("prefix cells"); within a cell the last coordinate runs
// lo..hi in steps of 2, so site indices resolve by pure arithmetic.
struct ConeLevel {
    struct Row {
        int32_t start = -1;
        int16_t lo = 0;
        int16_t hi = 0;
        bool empty() const { return start < 0; }
        int count() const { return empty() ? 0 : (hi - lo) / 2 + 1; }
    };

    int dim = 1;
    int time = 0;
    int radius = 0;          // min(time, cap)
    int extent = 0;          // prefix coordinates range over [-extent, extent]
    int64_t n_sites = 0;
    std::vector<Row> rows;   // (2*extent+1)^(dim-1) cells; dim==1 has one cell
    std::vector<int64_t> nonempty_cells;  // lex-ordered, for index->coords

    int64_t cell_index(const int* x) const {
        int64_t idx = 0, stride = 1;
        for (int j = 0; j + 1 < dim; ++j) {
            idx += (x[j] + extent) * stride;
            stride *= 2 * extent + 1;
        }
        return idx;
    }

    const Row* row_at(const int* x) const {
        for (int j = 0; j + 1 < dim; ++j)
            if (x[j] < -extent || x[j] > extent) return nullptr;
        return &rows[cell_index(x)];
    }

    // -1 if (x) is not a populated cone site.
    int32_t site_index(const int* x) const;
    int32_t site_index(const Coords& x) const { return site_index(x.data()); }

    Coords site_coords(int32_t idx) const;
};

// All levels 0..horizon for a given dimension.  A radius cap of the form
// min(t, ceil(a*sqrt(t)) + b) bounds the working set for long horizons;
// cap_a <= 0 keeps the exact full cone.
class ConeLattice {
  public:
    ConeLattice(int dim, int horizon, double cap_a = 0.0, int cap_b = 0);

    int dim() const { return dim_; }
    int horizon() const { return horizon_; }
    bool capped() const { return cap_a_ > 0.0; }
    const ConeLevel& level(int t) const { return levels_.at(t); }
    int64_t total_sites() const { return total_sites_; }

  private:
    int dim_, horizon_;
    double cap_a_;
    int cap_b_;
    int64_t total_sites_ = 0;
    std::vector<ConeLevel> levels_;
};

}  // namespace polymerlab

#endif
