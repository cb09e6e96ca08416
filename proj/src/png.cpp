#include "gridsr/png.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace gridsr {

namespace {

std::uint32_t crc32_update(std::uint32_t crc, const std::uint8_t* data, std::size_t n) {
    static std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& payload) {
    push_u32(out, static_cast<std::uint32_t>(payload.size()));
    std::vector<std::uint8_t> body(type, type + 4);
    body.insert(body.end(), payload.begin(), payload.end());
    out.insert(out.end(), body.begin(), body.end());
    push_u32(out, crc32_update(0, body.data(), body.size()));
}

// zlib stream with stored (uncompressed) deflate blocks.
std::vector<std::uint8_t> zlib_store(const std::vector<std::uint8_t>& raw) {
    std::vector<std::uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    std::size_t pos = 0;
    do {
        const std::size_t n = std::min<std::size_t>(raw.size() - pos, 65535);
        const bool last = pos + n == raw.size();
        z.push_back(last ? 1 : 0);
        z.push_back(static_cast<std::uint8_t>(n & 0xFF));
        z.push_back(static_cast<std::uint8_t>(n >> 8));
        z.push_back(static_cast<std::uint8_t>(~n & 0xFF));
        z.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + n);
        pos += n;
    } while (pos < raw.size());
    std::uint32_t a = 1, b = 0;
    for (std::uint8_t c : raw) {
        a = (a + c) % 65521;
        b = (b + a) % 65521;
    }
    push_u32(z, (b << 16) | a);
    return z;
}

// Compact sequential colormap (dark blue -> teal -> yellow).
std::array<std::uint8_t, 3> colormap(double t) {
    static const double anchors[][4] = {
        {0.00, 68, 1, 84},    {0.25, 59, 82, 139},  {0.50, 33, 145, 140},
        {0.75, 94, 201, 98},  {1.00, 253, 231, 37},
    };
    t = std::clamp(t, 0.0, 1.0);
    for (int k = 0; k < 4; ++k) {
        if (t <= anchors[k + 1][0]) {
            const double f = (t - anchors[k][0]) / (anchors[k + 1][0] - anchors[k][0]);
            return {static_cast<std::uint8_t>(anchors[k][1] + f * (anchors[k + 1][1] - anchors[k][1])),
                    static_cast<std::uint8_t>(anchors[k][2] + f * (anchors[k + 1][2] - anchors[k][2])),
                    static_cast<std::uint8_t>(anchors[k][3] + f * (anchors[k + 1][3] - anchors[k][3]))};
        }
    }
    return {253, 231, 37};
}

} // namespace

void write_png(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw ShapeError("write_png: buffer size does not match dimensions");
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * width));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0); // filter: none
        raw.insert(raw.end(), rgb.begin() + static_cast<std::size_t>(y) * width * 3,
                   rgb.begin() + static_cast<std::size_t>(y + 1) * width * 3);
    }

    std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    std::vector<std::uint8_t> ihdr;
    push_u32(ihdr, static_cast<std::uint32_t>(width));
    push_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    push_chunk(png, "IHDR", ihdr);
    push_chunk(png, "IDAT", zlib_store(raw));
    push_chunk(png, "IEND", {});

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("write_png: cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
}

void render_field_png(const std::string& path, const Field& field, double vmin, double vmax,
                      int cell_pixels) {
    const int H = field.spec.n_lat, W = field.spec.n_lon;
    const int width = W * cell_pixels, height = H * cell_pixels;
    const double range = vmax > vmin ? vmax - vmin : 1.0;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const auto c = colormap((field.at(i, j) - vmin) / range);
            for (int pi = 0; pi < cell_pixels; ++pi)
                for (int pj = 0; pj < cell_pixels; ++pj) {
                    const std::size_t p =
                        (static_cast<std::size_t>(i * cell_pixels + pi) * width +
                         j * cell_pixels + pj) * 3;
                    rgb[p] = c[0];
                    rgb[p + 1] = c[1];
                    rgb[p + 2] = c[2];
                }
        }
    }
    write_png(path, width, height, rgb);
}

} // namespace gridsr
