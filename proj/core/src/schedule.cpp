#include "fd/schedule.hpp"

#include <stdexcept>
#include <string>

namespace fd {

EditSchedule make_schedule(uint32_t n_total, uint32_t n_skip) {
    if (n_total < 1) {
        throw std::invalid_argument("make_schedule: n_total must be >= 1");
    }
    if (n_skip >= n_total) {
        throw std::invalid_argument("make_schedule: n_skip " + std::to_string(n_skip) +
                                    " must be < n_total " + std::to_string(n_total));
    }
    EditSchedule s;
    s.n_total = n_total;
    s.n_skip = n_skip;
    s.grid.reserve(n_total - n_skip + 1);
    for (uint32_t i = n_skip; i <= n_total; ++i) {
        // i == n_total lands on exactly 0.
        s.grid.push_back(1.0 - double(i) / double(n_total));
    }
    return s;
}

}  // namespace fd
