#ifndef OARVC_TENSOR_HPP
#define OARVC_TENSOR_HPP

#include <cstddef>
#include <vector>

namespace oarvc {

// Dense H x W x D float tensor, row-major with depth fastest.
struct Tensor3 {
    int height = 0;
    int width = 0;
    int depth = 0;
    std::vector<float> data;

    Tensor3() = default;
    Tensor3(int h, int w, int d)
        : height(h), width(w), depth(d),
          data(static_cast<std::size_t>(h) * w * d, 0.0f) {}

    float* at(int i, int j) {
        return data.data() + (static_cast<std::size_t>(i) * width + j) * depth;
    }
    const float* at(int i, int j) const {
        return data.data() + (static_cast<std::size_t>(i) * width + j) * depth;
    }

    friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

}  // namespace oarvc

#endif  // OARVC_TENSOR_HPP
