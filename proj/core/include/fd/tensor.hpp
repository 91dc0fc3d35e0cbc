#ifndef FD_TENSOR_HPP
#define FD_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fd {

struct TensorShape {
    uint32_t t = 0;
    uint32_t h = 0;
    uint32_t w = 0;
    uint32_t c = 0;

    size_t total() const {
        return size_t(t) * h * w * c;
    }
    bool operator==(const TensorShape& o) const {
        return t == o.t && h == o.h && w == o.w && c == o.c;
    }
    bool operator!=(const TensorShape& o) const { return !(*this == o); }
    std::string str() const;
};

// Throws std::invalid_argument if any dimension is zero.
void require_valid_shape(const TensorShape& s, const char* what);

// Dense video volume, row-major [t][y][x][c]. Values are stored as double;
// file serialization quantizes to 32-bit floats (see fdt.hpp).
class VideoTensor {
public:
    VideoTensor() = default;
    explicit VideoTensor(TensorShape shape, double fill = 0.0);
    VideoTensor(TensorShape shape, std::vector<double> values);

    const TensorShape& shape() const { return shape_; }
    uint32_t frames() const { return shape_.t; }
    uint32_t height() const { return shape_.h; }
    uint32_t width() const { return shape_.w; }
    uint32_t channels() const { return shape_.c; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    size_t index(uint32_t t, uint32_t y, uint32_t x, uint32_t c) const {
        return ((size_t(t) * shape_.h + y) * shape_.w + x) * shape_.c + c;
    }
    double& at(uint32_t t, uint32_t y, uint32_t x, uint32_t c) {
        return data_[index(t, y, x, c)];
    }
    double at(uint32_t t, uint32_t y, uint32_t x, uint32_t c) const {
        return data_[index(t, y, x, c)];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    TensorShape shape_;
    std::vector<double> data_;
};

void require_same_shape(const VideoTensor& a, const VideoTensor& b, const char* what);

VideoTensor add(const VideoTensor& a, const VideoTensor& b);
VideoTensor sub(const VideoTensor& a, const VideoTensor& b);
VideoTensor scaled(const VideoTensor& a, double s);
// y += alpha * x
void axpy_in_place(VideoTensor& y, double alpha, const VideoTensor& x);

double l2_norm(const VideoTensor& a);
double max_abs(const VideoTensor& a);
double max_abs_diff(const VideoTensor& a, const VideoTensor& b);
bool all_finite(const VideoTensor& a);

// Copies frame `t` into a T=1 tensor with the same H, W, C.
VideoTensor slice_frame(const VideoTensor& v, uint32_t t);

}  // namespace fd

#endif
