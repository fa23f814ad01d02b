#include "lego/errors.hpp"
#include "lego/executor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace lego {

namespace {

// All mock outputs are functions of this key: tool name, the sorted textual
// input summaries, and the seed.
std::uint64_t invocation_hash(const ToolSpec& tool,
                              const std::map<std::string, Value>& inputs,
                              std::uint64_t seed) {
    std::uint64_t h = hash_text(tool.canonical_name, 14695981039346656037ull);
    for (const auto& [slot, value] : inputs)
        h = hash_text(slot + "=" + value.summary() + ";", h);
    return fnv1a64(&seed, sizeof(seed), h);
}

std::uint64_t mix(std::uint64_t h, std::uint32_t tag) {
    return fnv1a64(&tag, sizeof(tag), h);
}

// Pseudo-random rectangle covering up to about a third of each dimension.
MaskBuf hashed_rect(int w, int h, std::uint64_t key) {
    const int x0 = static_cast<int>(mix(key, 1) % static_cast<std::uint64_t>(w));
    const int y0 = static_cast<int>(mix(key, 2) % static_cast<std::uint64_t>(h));
    const int rw = 1 + static_cast<int>(mix(key, 3) %
                                        static_cast<std::uint64_t>(std::max(1, w / 3)));
    const int rh = 1 + static_cast<int>(mix(key, 4) %
                                        static_cast<std::uint64_t>(std::max(1, h / 3)));
    return MaskBuf::rect(w, h, x0, y0, std::min(w - 1, x0 + rw),
                         std::min(h - 1, y0 + rh));
}

// Opaque color: at least one channel is forced non-zero so the result never
// reads as transparent.
void hashed_color(std::uint64_t key, std::uint8_t rgb[3]) {
    rgb[0] = static_cast<std::uint8_t>((mix(key, 5) & 0xFF) | 0x10);
    rgb[1] = static_cast<std::uint8_t>(mix(key, 6) & 0xFF);
    rgb[2] = static_cast<std::uint8_t>(mix(key, 7) & 0xFF);
}

const ImageBuf& require_image(const std::map<std::string, Value>& inputs,
                              const char* slot) {
    auto it = inputs.find(slot);
    if (it == inputs.end() || !it->second.image())
        fail("MissingBinding", std::string("mock backend needs image slot '") +
                                   slot + "'");
    return *it->second.image();
}

const MaskBuf* optional_mask(const std::map<std::string, Value>& inputs,
                             const char* slot) {
    auto it = inputs.find(slot);
    return it == inputs.end() ? nullptr : it->second.mask();
}

const double* optional_number(const std::map<std::string, Value>& inputs,
                              const char* slot) {
    auto it = inputs.find(slot);
    return it == inputs.end() ? nullptr : it->second.number();
}

ImageBuf cutout(const ImageBuf& src, const MaskBuf& mask) {
    ImageBuf out = ImageBuf::filled(src.width, src.height, 0, 0, 0);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            if (mask.get(x, y)) {
                const std::uint8_t* s = src.at(x, y);
                std::uint8_t* d = out.at(x, y);
                d[0] = s[0];
                d[1] = s[1];
                d[2] = s[2];
            }
    return out;
}

std::map<std::string, Value> segmentation(const ImageBuf& image,
                                          std::uint64_t key) {
    MaskBuf mask = hashed_rect(image.width, image.height, key);
    std::map<std::string, Value> out;
    out["image"] = Value::img(cutout(image, mask));
    out["mask"] = Value::msk(std::move(mask));
    return out;
}

std::map<std::string, Value> recolor(const ImageBuf& image, const MaskBuf* mask,
                                     std::uint64_t key) {
    std::uint8_t rgb[3];
    hashed_color(key, rgb);
    ImageBuf out = image;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            if (!mask || mask->get(x, y)) {
                std::uint8_t* d = out.at(x, y);
                d[0] = rgb[0];
                d[1] = rgb[1];
                d[2] = rgb[2];
            }
    std::map<std::string, Value> result;
    result["image"] = Value::img(std::move(out));
    return result;
}

std::map<std::string, Value> caption_and_expand(
    const std::map<std::string, Value>& inputs, std::uint64_t key) {
    const ImageBuf& image = require_image(inputs, "image");
    std::map<std::string, Value> out;
    out["caption"] = Value::txt("a synthetic scene " + hex8(key));

    const double* uniform = optional_number(inputs, "ratio");
    const double* l = optional_number(inputs, "left_ratio");
    const double* r = optional_number(inputs, "right_ratio");
    const double* t = optional_number(inputs, "top_ratio");
    const double* b = optional_number(inputs, "bottom_ratio");
    double left = 0, right = 0, top = 0, bottom = 0;
    bool expand = false;
    if (uniform) {
        left = right = top = bottom = *uniform;
        expand = true;
    } else if (l && r && t && b) {
        left = *l;
        right = *r;
        top = *t;
        bottom = *b;
        expand = true;
    }
    if (!expand) {
        out["image"] = Value::nil();
        out["mask"] = Value::nil();
        return out;
    }
    if (left < 0 || right < 0 || top < 0 || bottom < 0)
        fail("MockBackendError", "expansion ratios must be non-negative");

    const int add_l = static_cast<int>(std::lround(left * image.width));
    const int add_r = static_cast<int>(std::lround(right * image.width));
    const int add_t = static_cast<int>(std::lround(top * image.height));
    const int add_b = static_cast<int>(std::lround(bottom * image.height));
    const int new_w = image.width + add_l + add_r;
    const int new_h = image.height + add_t + add_b;
    if (new_w > 8192 || new_h > 8192)
        fail("MockBackendError", "expanded canvas exceeds 8192 pixels");

    ImageBuf expanded = ImageBuf::filled(new_w, new_h, 0, 0, 0);
    MaskBuf mask = MaskBuf::zeros(new_w, new_h);
    for (int y = 0; y < new_h; ++y)
        for (int x = 0; x < new_w; ++x) {
            const int sx = x - add_l;
            const int sy = y - add_t;
            const bool inside = sx >= 0 && sx < image.width && sy >= 0 &&
                                sy < image.height;
            if (inside) {
                const std::uint8_t* s = image.at(sx, sy);
                std::uint8_t* d = expanded.at(x, y);
                d[0] = s[0];
                d[1] = s[1];
                d[2] = s[2];
            } else {
                mask.set(x, y, 1);  // region the editing model must fill
            }
        }
    out["image"] = Value::img(std::move(expanded));
    out["mask"] = Value::msk(std::move(mask));
    return out;
}

std::map<std::string, Value> fast_inpaint(const ImageBuf& image,
                                          const MaskBuf& mask) {
    if (image.width != mask.width || image.height != mask.height)
        fail("DimensionMismatch", "image and mask sizes differ");
    std::uint64_t sum[3] = {0, 0, 0};
    std::size_t outside = 0;
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            if (!mask.get(x, y)) {
                const std::uint8_t* p = image.at(x, y);
                sum[0] += p[0];
                sum[1] += p[1];
                sum[2] += p[2];
                ++outside;
            }
    std::uint8_t fillv[3] = {128, 128, 128};  // fallback: fully masked image
    if (outside)
        for (int c = 0; c < 3; ++c)
            fillv[c] = static_cast<std::uint8_t>(sum[c] / outside);

    ImageBuf out = image;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            if (mask.get(x, y)) {
                std::uint8_t* d = out.at(x, y);
                d[0] = fillv[0];
                d[1] = fillv[1];
                d[2] = fillv[2];
            }
    const double frac = static_cast<double>(mask.popcount()) /
                        static_cast<double>(mask.bits.size());
    std::map<std::string, Value> result;
    result["image"] = Value::img(std::move(out));
    result["score"] = Value::num(std::round(frac * 1000.0) / 1000.0);
    return result;
}

} // namespace

std::map<std::string, Value> MockBackend::invoke(
    const ToolSpec& tool, const std::map<std::string, Value>& inputs,
    std::uint64_t seed) {
    const std::uint64_t key = invocation_hash(tool, inputs, seed);
    const std::string& name = tool.canonical_name;

    if (name == "RES" || name == "SOS")
        return segmentation(require_image(inputs, "image"), key);

    if (name == "ADD-PRED") {
        const ImageBuf& image = require_image(inputs, "image");
        MaskBuf rect = hashed_rect(image.width, image.height, key);
        if (const MaskBuf* bound = optional_mask(inputs, "mask")) {
            MaskBuf clipped = rect;
            for (std::size_t i = 0; i < clipped.bits.size(); ++i)
                clipped.bits[i] = clipped.bits[i] && bound->bits[i] ? 1 : 0;
            rect = clipped.popcount() ? std::move(clipped) : *bound;
        }
        std::map<std::string, Value> out;
        out["mask"] = Value::msk(std::move(rect));
        return out;
    }

    if (name == "CAP-PRED") return caption_and_expand(inputs, key);

    if (name == "FASTINPAINT")
        return fast_inpaint(require_image(inputs, "image"), [&]() -> const MaskBuf& {
            const MaskBuf* m = optional_mask(inputs, "mask");
            if (!m) fail("MissingBinding", "FASTINPAINT needs a mask");
            return *m;
        }());

    if (name == "FILL" || name == "INPAINT" || name == "RCM" ||
        name == "STYLE" || name == "ENV" || name == "POSE" || name == "CBG")
        return recolor(require_image(inputs, "image"),
                       optional_mask(inputs, "mask"), key);

    fail("MockUnsupportedTool", "no mock rule for tool '" + name + "'");
}

} // namespace lego
