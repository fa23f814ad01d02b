#include "lego/raster.hpp"

#include "lego/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace lego {

ImageBuf ImageBuf::filled(int w, int h, std::uint8_t r, std::uint8_t g,
                          std::uint8_t b) {
    ImageBuf img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

MaskBuf MaskBuf::zeros(int w, int h) {
    MaskBuf m;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<std::size_t>(w) * h, 0);
    return m;
}

MaskBuf MaskBuf::rect(int w, int h, int x0, int y0, int x1, int y1) {
    MaskBuf m = zeros(w, h);
    for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x)
            m.set(x, y, 1);
    return m;
}

std::size_t MaskBuf::popcount() const {
    return static_cast<std::size_t>(
        std::accumulate(bits.begin(), bits.end(), std::size_t{0}));
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_text(const std::string& s, std::uint64_t h) {
    return fnv1a64(s.data(), s.size(), h);
}

std::string hex8(std::uint64_t h) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08llx",
                  static_cast<unsigned long long>(h & 0xffffffffull));
    return buf;
}

std::string Value::summary() const {
    if (const ImageBuf* i = image())
        return "img:" + std::to_string(i->width) + "x" +
               std::to_string(i->height) + ":" +
               hex8(fnv1a64(i->pixels.data(), i->pixels.size()));
    if (const MaskBuf* m = mask())
        return "msk:" + std::to_string(m->width) + "x" +
               std::to_string(m->height) + ":" +
               hex8(fnv1a64(m->bits.data(), m->bits.size()));
    if (const std::string* s = text()) return "txt:" + *s;
    if (const double* d = number()) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "num:%.17g", *d);
        return buf;
    }
    return "nil";
}

namespace {

void require_same_dims(int w1, int h1, int w2, int h2) {
    if (w1 != w2 || h1 != h2)
        fail("DimensionMismatch", std::to_string(w1) + "x" + std::to_string(h1) +
                                      " vs " + std::to_string(w2) + "x" +
                                      std::to_string(h2));
}

} // namespace

MaskImagePair op_inverse(const MaskBuf* mask1, const MaskBuf* mask2,
                         const ImageBuf* image1, const ImageBuf* image2) {
    const bool masks = mask1 || mask2;
    const bool images = image1 || image2;
    if (masks == images)
        fail("KindViolation", "exactly one of masks/images must be given");

    if (masks) {
        if (!mask2) {
            // Nothing to subtract.
            if (!mask1) fail("KindViolation", "both masks are null");
            return {*mask1, std::nullopt};
        }
        MaskBuf out;
        if (mask1) {
            require_same_dims(mask1->width, mask1->height, mask2->width,
                              mask2->height);
            out = *mask1;
            for (std::size_t i = 0; i < out.bits.size(); ++i)
                out.bits[i] = out.bits[i] && !mask2->bits[i] ? 1 : 0;
        } else {
            // Null mask1 stands for a full mask: complement of mask2.
            out = MaskBuf::zeros(mask2->width, mask2->height);
            for (std::size_t i = 0; i < out.bits.size(); ++i)
                out.bits[i] = mask2->bits[i] ? 0 : 1;
        }
        return {std::move(out), std::nullopt};
    }

    if (!image1 || !image2)
        fail("KindViolation", "images must be both null or both valid");
    require_same_dims(image1->width, image1->height, image2->width,
                      image2->height);
    ImageBuf out = *image1;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = static_cast<std::uint8_t>(
            std::max(0, int(out.pixels[i]) - int(image2->pixels[i])));
    return {std::nullopt, std::move(out)};
}

MaskImagePair op_compose(const MaskBuf* mask1, const MaskBuf* mask2,
                         const ImageBuf* image1, const ImageBuf* image2) {
    const bool masks = mask1 || mask2;
    const bool images = image1 || image2;
    if (masks == images)
        fail("KindViolation", "exactly one of masks/images must be given");

    if (masks) {
        if (!mask1) return {*mask2, std::nullopt};
        if (!mask2) return {*mask1, std::nullopt};
        require_same_dims(mask1->width, mask1->height, mask2->width,
                          mask2->height);
        MaskBuf out = *mask1;
        for (std::size_t i = 0; i < out.bits.size(); ++i)
            out.bits[i] = out.bits[i] || mask2->bits[i] ? 1 : 0;
        return {std::move(out), std::nullopt};
    }

    if (!image1 || !image2)
        fail("KindViolation", "images must be both null or both valid");
    require_same_dims(image1->width, image1->height, image2->width,
                      image2->height);
    // Second input wins wherever it has content; zero pixels are transparent.
    ImageBuf out = *image1;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            if (!image2->transparent_at(x, y)) {
                const std::uint8_t* src = image2->at(x, y);
                std::uint8_t* dst = out.at(x, y);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            }
    return {std::nullopt, std::move(out)};
}

MaskImagePair op_resize(const MaskBuf* mask, const ImageBuf* image,
                        double ratio) {
    if ((mask != nullptr) == (image != nullptr))
        fail("KindViolation", "exactly one of mask/image must be given");
    if (!(ratio > 0.0)) fail("NonPositiveRatio", "ratio must be > 0");

    const int w = mask ? mask->width : image->width;
    const int h = mask ? mask->height : image->height;
    auto valid = [&](int x, int y) {
        return mask ? mask->get(x, y) != 0 : !image->transparent_at(x, y);
    };

    double cx = 0, cy = 0;
    std::size_t n = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (valid(x, y)) {
                cx += x;
                cy += y;
                ++n;
            }
    if (n == 0) fail("EmptyValidRegion", "input has no valid pixels");
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    // Nearest-neighbor resample about the valid-region centroid; content
    // leaving the canvas is cropped, vacated pixels stay zero.
    MaskBuf out_mask = MaskBuf::zeros(w, h);
    ImageBuf out_image;
    if (image) out_image = ImageBuf::filled(w, h, 0, 0, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const long sx = std::lround(cx + (x - cx) / ratio);
            const long sy = std::lround(cy + (y - cy) / ratio);
            if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
            if (!valid(static_cast<int>(sx), static_cast<int>(sy))) continue;
            if (mask) {
                out_mask.set(x, y, 1);
            } else {
                const std::uint8_t* src =
                    image->at(static_cast<int>(sx), static_cast<int>(sy));
                std::uint8_t* dst = out_image.at(x, y);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            }
        }
    if (mask) return {std::move(out_mask), std::nullopt};
    return {std::nullopt, std::move(out_image)};
}

MaskBuf op_bbox(const MaskBuf& mask) {
    int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) fail("EmptyMask", "mask has no set bits");
    return MaskBuf::rect(mask.width, mask.height, x0, y0, x1, y1);
}

} // namespace lego
