#ifndef FD_SCHEDULE_HPP
#define FD_SCHEDULE_HPP

#include <cstdint>
#include <vector>

namespace fd {

// Discretized integration grid. Time runs from 1 (pure noise) down to 0
// (data); the first n_skip steps of an n_total-step schedule are omitted, so
// the grid is [1 - i/n_total for i = n_skip..n_total].
struct EditSchedule {
    uint32_t n_total = 0;
    uint32_t n_skip = 0;
    std::vector<double> grid;

    double start_time() const { return grid.front(); }
    size_t points() const { return grid.size(); }
};

// Throws std::invalid_argument unless n_total >= 1 and n_skip < n_total.
EditSchedule make_schedule(uint32_t n_total, uint32_t n_skip);

}  // namespace fd

#endif
