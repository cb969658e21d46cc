#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

/// Dense row-major 2-d array.
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{})
        : w_(width), h_(height), data_(std::size_t(width) * std::size_t(height), fill) {
        require(width >= 0 && height >= 0, "Plane: negative dimensions");
    }

    int width() const { return w_; }
    int height() const { return h_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(int x, int y) { return data_[std::size_t(y) * w_ + x]; }
    const T& operator()(int x, int y) const { return data_[std::size_t(y) * w_ + x]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    int w_ = 0, h_ = 0;
    std::vector<T> data_;
};

using RgbImage = Plane<Color>;
using LumaImage = Plane<double>;
using Mask = Plane<std::uint8_t>;

template <typename A, typename B>
bool same_shape(const Plane<A>& a, const Plane<B>& b) {
    return a.width() == b.width() && a.height() == b.height();
}

inline LumaImage to_luma(const RgbImage& img) {
    LumaImage y(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) y(c, r) = luma(img(c, r));
    return y;
}

}  // namespace pcqa
