#include "bml/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bml/io_format.hpp"

namespace bml {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

Rgb hsv(double h, double s, double v) {
    h = std::fmod(h, 1.0) * 6.0;
    const int i = static_cast<int>(h);
    const double f = h - i;
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r, g, b;
    switch (i) {
        case 0: r = v, g = t, b = p; break;
        case 1: r = q, g = v, b = p; break;
        case 2: r = p, g = v, b = t; break;
        case 3: r = p, g = q, b = v; break;
        case 4: r = t, g = p, b = v; break;
        default: r = v, g = p, b = q; break;
    }
    auto byte = [](double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
    return {byte(r), byte(g), byte(b)};
}

// Dark blue through teal and yellow to red.
Rgb heat_colour(double t) {
    static constexpr double stops[][3] = {{20, 30, 110}, {30, 150, 160}, {240, 220, 60}, {200, 40, 30}};
    t = std::clamp(t, 0.0, 1.0) * 3.0;
    const int k = std::min(static_cast<int>(t), 2);
    const double f = t - k;
    Rgb out;
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<std::uint8_t>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
    return out;
}

void put(Image& img, int x, int y, Rgb c) {
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * img.width + x);
    std::copy(c.begin(), c.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(at));
}

Image blank(const SphereGrid& grid) {
    Image img;
    img.width = 2 * grid.resolution();
    img.height = grid.resolution();
    img.rgb.assign(3 * static_cast<std::size_t>(img.width) * img.height, 0);
    return img;
}

// Pixel of raster cell (chart, ix, iy): imaginary axis points up.
std::pair<int, int> pixel_of(const SphereGrid& grid, int chart, int ix, int iy) {
    return {chart * grid.resolution() + ix, grid.resolution() - 1 - iy};
}

}  // namespace

std::array<std::uint8_t, 3> Image::pixel(int x, int y) const {
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * width + x);
    return {rgb[at], rgb[at + 1], rgb[at + 2]};
}

std::array<std::uint8_t, 3> component_colour(int component_id) {
    if (component_id <= 1) return {70, 130, 220};
    return hsv(0.11 + 0.618033988749895 * component_id, 0.65, 0.95);
}

Image render_basin(const SphereGrid& grid) {
    Image img = blank(grid);
    const int res = grid.resolution();
    for (int chart = 0; chart < 2; ++chart)
        for (int iy = 0; iy < res; ++iy)
            for (int ix = 0; ix < res; ++ix) {
                const CellId id = grid.cell_id(static_cast<Chart>(chart), ix, iy);
                if (!grid.member(id)) continue;
                const auto [px, py] = pixel_of(grid, chart, ix, iy);
                put(img, px, py, component_colour(std::max(grid.component(id), 1)));
            }
    return img;
}

Image render_heat(const SphereGrid& grid, std::span<const std::pair<CellId, double>> samples) {
    Image img = blank(grid);
    const int res = grid.resolution();
    const std::size_t per_chart = static_cast<std::size_t>(res) * res;
    double top = 0.0;
    for (const auto& s : samples)
        if (std::isfinite(s.second)) top = std::max(top, s.second);

    // Each sample seeds its own raster cell and the view of it in the other chart.
    std::vector<double> value(grid.cell_count(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint8_t> seed(grid.cell_count(), 0);
    for (const auto& [cell, v] : samples) {
        const ComplexPoint p = grid.center_point(cell);
        for (int chart = 0; chart < 2; ++chart) {
            const Chart c = static_cast<Chart>(chart);
            if (p.chart != c && p.coord() == cplx(0.0, 0.0)) continue;
            const cplx x = p.chart == c ? p.coord() : 1.0 / p.coord();
            if (std::max(std::abs(x.real()), std::abs(x.imag())) >= grid.spec().chart_extent) continue;
            const CellId view = grid.raster_cell(c, x);
            if (!seed[view] || v > value[view]) value[view] = v;  // keep the worst sample on collisions
            seed[view] = 1;
        }
    }
    for (int chart = 0; chart < 2; ++chart) {
        const std::span<const std::uint8_t> s(seed.data() + chart * per_chart, per_chart);
        const std::vector<std::int32_t> near = nearest_seed(s, res);
        for (int iy = 0; iy < res; ++iy)
            for (int ix = 0; ix < res; ++ix) {
                const CellId id = grid.cell_id(static_cast<Chart>(chart), ix, iy);
                if (!grid.member(id)) continue;
                const std::int32_t k = near[static_cast<std::size_t>(iy) * res + ix];
                Rgb colour{96, 96, 96};
                if (k >= 0) {
                    const double v = value[chart * per_chart + k];
                    if (std::isfinite(v)) colour = heat_colour(top > 0.0 ? v / top : 0.0);
                }
                const auto [px, py] = pixel_of(grid, chart, ix, iy);
                put(img, px, py, colour);
            }
    }
    return img;
}

void write_ppm(std::ostream& out, const Image& image) {
    out << "P6\n# " << kVersionLine << '\n' << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
}

}  // namespace bml
