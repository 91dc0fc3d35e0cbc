#include "fd/netpbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fd {

namespace {

unsigned char quantize(double v) {
    double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

void write_binary(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("netpbm: cannot open " + path + " for writing");
    os.write(bytes.data(), std::streamsize(bytes.size()));
    if (!os) throw std::runtime_error("netpbm: short write to " + path);
}

}  // namespace

void write_ppm_frame(const std::string& path, const VideoTensor& video, uint32_t frame) {
    if (frame >= video.frames()) {
        throw std::invalid_argument("write_ppm_frame: frame " + std::to_string(frame) +
                                    " out of range");
    }
    uint32_t h = video.height(), w = video.width(), c = video.channels();
    std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    out.reserve(out.size() + size_t(h) * w * 3);
    for (uint32_t y = 0; y < h; ++y) {
        for (uint32_t x = 0; x < w; ++x) {
            if (c == 3) {
                for (uint32_t k = 0; k < 3; ++k) out.push_back(char(quantize(video.at(frame, y, x, k))));
            } else {
                unsigned char g = quantize(video.at(frame, y, x, 0));
                out.push_back(char(g));
                out.push_back(char(g));
                out.push_back(char(g));
            }
        }
    }
    write_binary(path, out);
}

void write_pgm_plane(const std::string& path, const std::vector<double>& values, uint32_t h,
                     uint32_t w) {
    if (values.size() != size_t(h) * w) {
        throw std::invalid_argument("write_pgm_plane: value count does not match dimensions");
    }
    std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    out.reserve(out.size() + values.size());
    for (double v : values) out.push_back(char(quantize(v)));
    write_binary(path, out);
}

}  // namespace fd
