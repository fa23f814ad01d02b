#include "lego/netpbm.hpp"

#include "lego/errors.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace lego {

namespace {

// Reads the next header token, skipping whitespace and '#' comment lines.
int next_header_int(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == EOF) fail("IoError", "truncated netpbm header");
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int v = 0;
    if (!(in >> v)) fail("IoError", "malformed netpbm header");
    return v;
}

void read_header(std::istream& in, const char* magic, int& w, int& h) {
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != magic[0] || m1 != magic[1])
        fail("IoError", std::string("expected ") + magic + " magic");
    w = next_header_int(in);
    h = next_header_int(in);
    const int maxval = next_header_int(in);
    if (maxval != 255) fail("IoError", "only maxval 255 is supported");
    in.get();  // single whitespace before raster
    if (w <= 0 || h <= 0) fail("IoError", "non-positive dimensions");
}

} // namespace

ImageBuf read_ppm(std::istream& in) {
    int w = 0, h = 0;
    read_header(in, "P6", w, h);
    ImageBuf img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        fail("IoError", "truncated PPM raster");
    return img;
}

void write_ppm(std::ostream& out, const ImageBuf& img) {
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

MaskBuf read_pgm(std::istream& in) {
    int w = 0, h = 0;
    read_header(in, "P5", w, h);
    MaskBuf mask;
    mask.width = w;
    mask.height = h;
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        fail("IoError", "truncated PGM raster");
    mask.bits.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) mask.bits[i] = raw[i] ? 1 : 0;
    return mask;
}

void write_pgm(std::ostream& out, const MaskBuf& mask) {
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::vector<std::uint8_t> raw(mask.bits.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mask.bits[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
}

namespace {

template <typename T, typename Reader>
T read_file(const std::string& path, Reader reader) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("IoError", "cannot open '" + path + "'");
    return reader(in);
}

template <typename T, typename Writer>
void write_file(const std::string& path, const T& v, Writer writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot open '" + path + "' for writing");
    writer(out, v);
    if (!out) fail("IoError", "short write to '" + path + "'");
}

} // namespace

ImageBuf read_ppm_file(const std::string& path) {
    return read_file<ImageBuf>(path, [](std::istream& in) { return read_ppm(in); });
}

void write_ppm_file(const std::string& path, const ImageBuf& img) {
    write_file(path, img,
               [](std::ostream& out, const ImageBuf& v) { write_ppm(out, v); });
}

MaskBuf read_pgm_file(const std::string& path) {
    return read_file<MaskBuf>(path, [](std::istream& in) { return read_pgm(in); });
}

void write_pgm_file(const std::string& path, const MaskBuf& mask) {
    write_file(path, mask,
               [](std::ostream& out, const MaskBuf& v) { write_pgm(out, v); });
}

} // namespace lego
