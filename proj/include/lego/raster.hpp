#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lego {

// Row-major 8-bit RGB image. An all-zero pixel is treated as transparent by
// the compositing built-ins.
struct ImageBuf {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    static ImageBuf filled(int w, int h, std::uint8_t r, std::uint8_t g,
                           std::uint8_t b);

    std::uint8_t* at(int x, int y) { return &pixels[3 * (y * width + x)]; }
    const std::uint8_t* at(int x, int y) const {
        return &pixels[3 * (y * width + x)];
    }
    bool transparent_at(int x, int y) const {
        const std::uint8_t* p = at(x, y);
        return p[0] == 0 && p[1] == 0 && p[2] == 0;
    }

    bool operator==(const ImageBuf&) const = default;
};

// Row-major binary mask; bits are 0 or 1 in memory (0/255 on disk).
struct MaskBuf {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // width * height

    static MaskBuf zeros(int w, int h);
    static MaskBuf rect(int w, int h, int x0, int y0, int x1, int y1);  // inclusive

    std::uint8_t get(int x, int y) const { return bits[y * width + x]; }
    void set(int x, int y, std::uint8_t v) { bits[y * width + x] = v; }
    std::size_t popcount() const;

    bool operator==(const MaskBuf&) const = default;
};

// Runtime value flowing between steps.
struct Value {
    std::variant<std::monostate, ImageBuf, MaskBuf, std::string, double> data;

    Value() = default;
    static Value img(ImageBuf v) { return Value{std::move(v)}; }
    static Value msk(MaskBuf v) { return Value{std::move(v)}; }
    static Value txt(std::string v) { return Value{std::move(v)}; }
    static Value num(double v) { return Value{v}; }
    static Value nil() { return Value{}; }

    bool is_nil() const { return std::holds_alternative<std::monostate>(data); }
    const ImageBuf* image() const { return std::get_if<ImageBuf>(&data); }
    const MaskBuf* mask() const { return std::get_if<MaskBuf>(&data); }
    const std::string* text() const { return std::get_if<std::string>(&data); }
    const double* number() const { return std::get_if<double>(&data); }

    // Compact digest used for traces and the mock backend's hash keys.
    std::string summary() const;

    bool operator==(const Value&) const = default;

private:
    template <typename T>
    explicit Value(T&& v) : data(std::forward<T>(v)) {}
};

// Built-in raster tools. Nullable inputs are passed as pointers; outputs come
// back as (mask, image) optionals matching the INVERSE/COMPOSE/RESIZE slot
// layout. Errors: DimensionMismatch, KindViolation, NonPositiveRatio,
// EmptyValidRegion, EmptyMask.
using MaskImagePair = std::pair<std::optional<MaskBuf>, std::optional<ImageBuf>>;

MaskImagePair op_inverse(const MaskBuf* mask1, const MaskBuf* mask2,
                         const ImageBuf* image1, const ImageBuf* image2);
MaskImagePair op_compose(const MaskBuf* mask1, const MaskBuf* mask2,
                         const ImageBuf* image1, const ImageBuf* image2);
MaskImagePair op_resize(const MaskBuf* mask, const ImageBuf* image,
                        double ratio);
MaskBuf op_bbox(const MaskBuf& mask);

// FNV-1a over bytes; the determinism anchor for the mock backend.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 14695981039346656037ull);
std::uint64_t hash_text(const std::string& s, std::uint64_t h);
std::string hex8(std::uint64_t h);

} // namespace lego
