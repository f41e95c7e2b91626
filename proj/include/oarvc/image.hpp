#ifndef OARVC_IMAGE_HPP
#define OARVC_IMAGE_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oarvc {

// 8-bit RGB raster frame, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // width*height*3

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* pixel(int x, int y) {
        return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* pixel(int x, int y) const {
        return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    void fill(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        for (std::size_t i = 0; i + 2 < rgb.size(); i += 3) {
            rgb[i] = r;
            rgb[i + 1] = g;
            rgb[i + 2] = b;
        }
    }

    friend bool operator==(const Image&, const Image&) = default;
};

inline void write_ppm(const std::filesystem::path& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
    if (!out) throw std::runtime_error("short write: " + path.string());
}

inline std::vector<std::uint8_t> ppm_bytes(const Image& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                         "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), img.rgb.begin(), img.rgb.end());
    return bytes;
}

inline Image parse_ppm(const std::uint8_t* data, std::size_t size) {
    // Minimal P6 parser: magic, dims, maxval, single whitespace, raster.
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < size) {
            if (data[pos] == '#') {
                while (pos < size && data[pos] != '\n') ++pos;
            } else if (std::isspace(data[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> int {
        skip_space();
        int v = 0;
        bool any = false;
        while (pos < size && std::isdigit(data[pos])) {
            v = v * 10 + (data[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) throw std::runtime_error("malformed PPM header");
        return v;
    };
    if (size < 2 || data[0] != 'P' || data[1] != '6') throw std::runtime_error("not a P6 PPM");
    pos = 2;
    const int w = read_int();
    const int h = read_int();
    const int maxval = read_int();
    if (maxval != 255) throw std::runtime_error("unsupported PPM maxval");
    if (pos >= size || !std::isspace(data[pos])) throw std::runtime_error("malformed PPM header");
    ++pos;
    Image img(w, h);
    if (size - pos < img.rgb.size()) throw std::runtime_error("PPM raster truncated");
    std::copy(data + pos, data + pos + img.rgb.size(), img.rgb.begin());
    return img;
}

inline Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_ppm(bytes.data(), bytes.size());
}

}  // namespace oarvc

#endif  // OARVC_IMAGE_HPP
