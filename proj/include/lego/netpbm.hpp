#pragma once

#include "lego/raster.hpp"

#include <iosfwd>
#include <string>

namespace lego {

// Binary netpbm IO: images as P6 (maxval 255), masks as P5 with bits stored
// as 0/255. Throws Error("IoError") on malformed input or filesystem trouble.

ImageBuf read_ppm(std::istream& in);
ImageBuf read_ppm_file(const std::string& path);
void write_ppm(std::ostream& out, const ImageBuf& img);
void write_ppm_file(const std::string& path, const ImageBuf& img);

MaskBuf read_pgm(std::istream& in);
MaskBuf read_pgm_file(const std::string& path);
void write_pgm(std::ostream& out, const MaskBuf& mask);
void write_pgm_file(const std::string& path, const MaskBuf& mask);

} // namespace lego
