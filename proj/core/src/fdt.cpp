#include "fd/fdt.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace fd {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'T', '1'};

uint32_t read_u32_le(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

void put_u32_le(std::string& out, uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}

float f32_from_le(const unsigned char* p) {
    uint32_t bits = read_u32_le(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

}  // namespace

VideoTensor read_fdt(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("read_fdt: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 20) throw std::invalid_argument("read_fdt: truncated header in " + path);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw std::invalid_argument("read_fdt: bad magic in " + path);
    }
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 4;
    TensorShape shape{read_u32_le(p), read_u32_le(p + 4), read_u32_le(p + 8), read_u32_le(p + 12)};
    require_valid_shape(shape, "read_fdt");
    size_t expected = 20 + shape.total() * 4;
    if (bytes.size() != expected) {
        throw std::invalid_argument("read_fdt: payload size mismatch in " + path + " (expected " +
                                    std::to_string(expected) + " bytes, got " +
                                    std::to_string(bytes.size()) + ")");
    }
    VideoTensor out(shape);
    const unsigned char* v = p + 16;
    for (size_t i = 0; i < shape.total(); ++i, v += 4) {
        double d = f32_from_le(v);
        if (!std::isfinite(d)) {
            throw std::invalid_argument("read_fdt: non-finite value at element " +
                                        std::to_string(i) + " in " + path);
        }
        out.data()[i] = d;
    }
    return out;
}

void write_fdt(const std::string& path, const VideoTensor& tensor) {
    if (tensor.empty()) throw std::invalid_argument("write_fdt: empty tensor");
    std::string out;
    out.reserve(20 + tensor.size() * 4);
    out.append(kMagic, 4);
    put_u32_le(out, tensor.frames());
    put_u32_le(out, tensor.height());
    put_u32_le(out, tensor.width());
    put_u32_le(out, tensor.channels());
    for (double d : tensor.data()) {
        float f = float(d);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32_le(out, bits);
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_fdt: cannot open " + path + " for writing");
    os.write(out.data(), std::streamsize(out.size()));
    if (!os) throw std::runtime_error("write_fdt: short write to " + path);
}

}  // namespace fd
