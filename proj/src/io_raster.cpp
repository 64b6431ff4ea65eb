#include <png.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "alv/errors.hpp"
#include "alv/io.hpp"

namespace alv {

namespace {

struct FileCloser {
    FILE* fp = nullptr;
    ~FileCloser() {
        if (fp) fclose(fp);
    }
};

}  // namespace

ImageF load_raster_rgba(const std::filesystem::path& path) {
    FileCloser fc{fopen(path.string().c_str(), "rb")};
    if (!fc.fp) throw validation_error("cannot open raster file '" + path.string() + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw runtime_failure("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw runtime_failure("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw validation_error("failed to decode PNG '" + path.string() + "'");
    }
    png_init_io(png, fc.fp);
    png_read_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_GRAY ||
        color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    std::vector<unsigned char> bytes(static_cast<size_t>(width) * height * 4);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = bytes.data() + static_cast<size_t>(y) * width * 4;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    ImageF img(width, height, 4);
    for (size_t k = 0; k < bytes.size(); ++k) img.data[k] = bytes[k] / 255.0;
    return img;
}

void save_raster(const std::filesystem::path& path, const ImageF& image) {
    if (image.channels != 1 && image.channels != 3 && image.channels != 4)
        throw validation_error("raster output must have 1, 3 or 4 channels");

    FileCloser fc{fopen(path.string().c_str(), "wb")};
    if (!fc.fp) throw runtime_failure("cannot write raster file '" + path.string() + "'");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw runtime_failure("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw runtime_failure("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw runtime_failure("failed to encode PNG '" + path.string() + "'");
    }
    png_init_io(png, fc.fp);
    const int color_type = image.channels == 1   ? PNG_COLOR_TYPE_GRAY
                           : image.channels == 3 ? PNG_COLOR_TYPE_RGB
                                                 : PNG_COLOR_TYPE_RGBA;
    png_set_IHDR(png, info, image.width, image.height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<size_t>(image.width) * image.channels);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < image.channels; ++c) {
                double v = image.at(x, y, c);
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                row[static_cast<size_t>(x) * image.channels + c] =
                    static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

MaskImage load_mask(const std::filesystem::path& path) {
    const ImageF img = load_raster_rgba(path);
    MaskImage mask(img.width, img.height);
    size_t ambiguous = 0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double g = (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3.0;
            if (g > 0.25 && g < 0.75) ++ambiguous;
            mask.at(x, y) = g >= 0.5 ? 1 : 0;
        }
    }
    if (ambiguous * 20 > static_cast<size_t>(img.width) * img.height)
        throw validation_error("mask '" + path.string() +
                               "' is not binary: more than 5% of pixels are ambiguous");
    return mask;
}

}  // namespace alv
