#ifndef SAL_PNG_IO_HPP
#define SAL_PNG_IO_HPP

#include <string>
#include <vector>

#include "sal/image.hpp"

namespace sal {

// 8-bit RGB and grayscale PNG only; grayscale reads expand to RGB.
RasterImage load_image(const std::string& path);
void save_image(const RasterImage& img, const std::string& path);

// Saliency maps interchange as 8-bit grayscale, byte = round(v * 255).
void save_map(const SaliencyMap& map, const std::string& path);
SaliencyMap load_map(const std::string& path);

// Ground-truth masks: stored as 0/255 grayscale, loaded with byte >= 128 -> 1.
void save_mask(const BinaryMask& mask, const std::string& path);
BinaryMask load_mask(const std::string& path);

// Segmentation label grids as 16-bit grayscale.
void save_labels16(const std::vector<int>& labels, int width, int height,
                   const std::string& path);
std::vector<int> load_labels16(const std::string& path, int& width, int& height);

}  // namespace sal

#endif
