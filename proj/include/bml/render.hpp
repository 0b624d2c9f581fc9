#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "bml/sphere_grid.hpp"

namespace bml {

/// 8-bit RGB raster, rows top to bottom.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;
    std::array<std::uint8_t, 3> pixel(int x, int y) const;
};

/// Both chart rasters side by side (Z left, W right, imaginary axis up).
/// Member cells take their component's colour, everything else is black, so
/// the number of non-black pixels equals member_count_all().
Image render_basin(const SphereGrid& grid);

/// Member cells coloured by the value of the nearest sample cell of the same
/// chart raster (values scaled by their maximum); cells of non-finite samples
/// are grey, non-members black.
Image render_heat(const SphereGrid& grid, std::span<const std::pair<CellId, double>> samples);

/// Colour of component k >= 1; never black.
std::array<std::uint8_t, 3> component_colour(int component_id);

/// Binary PPM (P6, maxval 255) with the version line as a header comment.
void write_ppm(std::ostream& out, const Image& image);

}  // namespace bml
