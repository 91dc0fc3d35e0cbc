#include "fd/tensor.hpp"

#include <cmath>

namespace fd {

std::string TensorShape::str() const {
    return std::to_string(t) + "x" + std::to_string(h) + "x" + std::to_string(w) + "x" +
           std::to_string(c);
}

void require_valid_shape(const TensorShape& s, const char* what) {
    if (s.t == 0 || s.h == 0 || s.w == 0 || s.c == 0) {
        throw std::invalid_argument(std::string(what) + ": zero-sized shape " + s.str());
    }
}

VideoTensor::VideoTensor(TensorShape shape, double fill) : shape_(shape) {
    require_valid_shape(shape, "VideoTensor");
    data_.assign(shape.total(), fill);
}

VideoTensor::VideoTensor(TensorShape shape, std::vector<double> values)
    : shape_(shape), data_(std::move(values)) {
    require_valid_shape(shape, "VideoTensor");
    if (data_.size() != shape.total()) {
        throw std::invalid_argument("VideoTensor: data size " + std::to_string(data_.size()) +
                                    " does not match shape " + shape.str());
    }
}

void require_same_shape(const VideoTensor& a, const VideoTensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape().str() +
                                    " vs " + b.shape().str());
    }
}

VideoTensor add(const VideoTensor& a, const VideoTensor& b) {
    require_same_shape(a, b, "add");
    VideoTensor out(a.shape());
    for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
    return out;
}

VideoTensor sub(const VideoTensor& a, const VideoTensor& b) {
    require_same_shape(a, b, "sub");
    VideoTensor out(a.shape());
    for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    return out;
}

VideoTensor scaled(const VideoTensor& a, double s) {
    VideoTensor out(a.shape());
    for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * s;
    return out;
}

void axpy_in_place(VideoTensor& y, double alpha, const VideoTensor& x) {
    require_same_shape(y, x, "axpy");
    for (size_t i = 0; i < y.size(); ++i) y.data()[i] += alpha * x.data()[i];
}

double l2_norm(const VideoTensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v * v;
    return std::sqrt(acc);
}

double max_abs(const VideoTensor& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const VideoTensor& a, const VideoTensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    }
    return m;
}

bool all_finite(const VideoTensor& a) {
    for (double v : a.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

VideoTensor slice_frame(const VideoTensor& v, uint32_t t) {
    if (t >= v.frames()) {
        throw std::invalid_argument("slice_frame: frame " + std::to_string(t) +
                                    " out of range for " + v.shape().str());
    }
    TensorShape s{1, v.height(), v.width(), v.channels()};
    VideoTensor out(s);
    size_t per_frame = s.total();
    const double* src = v.data().data() + size_t(t) * per_frame;
    std::copy(src, src + per_frame, out.data().begin());
    return out;
}

}  // namespace fd
