#include "polymerlab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace polymerlab {

int32_t ConeLevel::site_index(const int* x) const {
    int pre = 0;
    for (int j = 0; j + 1 < dim; ++j) pre += std::abs(x[j]);
    int xd = x[dim - 1];
    if (pre + std::abs(xd) > radius) return -1;
    if (((pre + std::abs(xd)) & 1) != (time & 1)) return -1;
    const Row* r = row_at(x);
    if (!r || r->empty() || xd < r->lo || xd > r->hi) return -1;
    return r->start + (xd - r->lo) / 2;
}

Coords ConeLevel::site_coords(int32_t idx) const {
    // binary search over nonempty cells by start offset
    auto it = std::upper_bound(
        nonempty_cells.begin(), nonempty_cells.end(), idx,
        [this](int32_t i, int64_t cell) { return i < rows[cell].start; });
    if (it == nonempty_cells.begin()) throw std::out_of_range("site index");
    int64_t cell = *(it - 1);
    const Row& r = rows[cell];
    Coords x{};
    int64_t rem = cell;
    for (int j = 0; j + 1 < dim; ++j) {
        x[j] = static_cast<int>(rem % (2 * extent + 1)) - extent;
        rem /= 2 * extent + 1;
    }
    x[dim - 1] = r.lo + 2 * (idx - r.start);
    return x;
}

ConeLattice::ConeLattice(int dim, int horizon, double cap_a, int cap_b)
    : dim_(dim), horizon_(horizon), cap_a_(cap_a), cap_b_(cap_b) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dim must be in 1..4");
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    levels_.reserve(horizon + 1);
    for (int t = 0; t <= horizon; ++t) {
        ConeLevel lv;
        lv.dim = dim;
        lv.time = t;
        lv.radius = t;
        if (cap_a_ > 0.0)
            lv.radius = std::min<int>(
                t, static_cast<int>(std::ceil(cap_a_ * std::sqrt(double(t)))) + cap_b_);
        lv.extent = lv.radius;
        int64_t n_cells = 1;
        for (int j = 0; j + 1 < dim; ++j) n_cells *= 2 * lv.extent + 1;
        lv.rows.assign(n_cells, ConeLevel::Row{});
        // enumerate prefix cells in lexicographic order of cell index
        int pre[kMaxDim] = {0, 0, 0, 0};
        for (int j = 0; j + 1 < dim; ++j) pre[j] = -lv.extent;
        int64_t cell = 0;
        int32_t cursor = 0;
        while (true) {
            int pnorm = 0;
            for (int j = 0; j + 1 < dim; ++j) pnorm += std::abs(pre[j]);
            if (pnorm <= lv.radius) {
                int m = lv.radius - pnorm;
                int want_parity = (t - pnorm) & 1;
                int hi = ((m & 1) == want_parity) ? m : m - 1;
                if (hi >= 0) {
                    ConeLevel::Row& r = lv.rows[cell];
                    r.lo = static_cast<int16_t>(-hi);
                    r.hi = static_cast<int16_t>(hi);
                    r.start = cursor;
                    cursor += r.count();
                    lv.nonempty_cells.push_back(cell);
                }
            }
            // advance odometer
            int j = 0;
            for (; j + 1 < dim; ++j) {
                if (pre[j] < lv.extent) {
                    ++pre[j];
                    break;
                }
                pre[j] = -lv.extent;
            }
            ++cell;
            if (dim == 1 || j + 1 >= dim) break;
        }
        lv.n_sites = cursor;
        total_sites_ += cursor;
        levels_.push_back(std::move(lv));
    }
}

}  // namespace polymerlab
