#ifndef FDEDIT_TEST_HELPERS_HPP
#define FDEDIT_TEST_HELPERS_HPP

#include <cmath>
#include <vector>

#include "fd/noise.hpp"
#include "fd/tensor.hpp"

namespace th {

inline fd::VideoTensor random_tensor(const fd::TensorShape& shape, uint64_t seed,
                                     double lo = -1.0, double hi = 1.0) {
    fd::NoiseStream stream(fd::SeedSpec{seed, 0, 0});
    fd::VideoTensor out(shape);
    for (double& v : out.data()) v = lo + (hi - lo) * stream.next_uniform();
    return out;
}

inline fd::VideoTensor constant_tensor(const fd::TensorShape& shape, double value) {
    return fd::VideoTensor(shape, value);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline bool bitwise_equal(const fd::VideoTensor& a, const fd::VideoTensor& b) {
    if (a.shape() != b.shape()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a.data()[i] != b.data()[i]) return false;
    return true;
}

}  // namespace th

#endif
