#include "dinw/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

namespace dinw {

namespace {

struct File {
    std::FILE* f = nullptr;
    ~File() {
        if (f != nullptr) std::fclose(f);
    }
};

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

float from_quant(unsigned v, unsigned maxval) {
    return static_cast<float>(v) / static_cast<float>(maxval);
}

unsigned to_quant(float v, unsigned maxval) {
    const float c = clamp01(v);
    return static_cast<unsigned>(std::lround(static_cast<double>(c) * maxval));
}

Frame load_png(const std::string& path) {
    File file{std::fopen(path.c_str(), "rb")};
    if (file.f == nullptr) throw IoError("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG: " + path);
    }

    png_init_io(png, file.f);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    if (depth != 8 && depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG bit depth in " + path);
    }
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG channel count in " + path);
    }

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    pixels.resize(row_bytes * h);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = pixels.data() + y * row_bytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Frame out(static_cast<int>(w), static_cast<int>(h), channels);
    const unsigned maxval = depth == 16 ? 65535u : 255u;
    for (png_uint_32 y = 0; y < h; ++y) {
        const png_byte* row = pixels.data() + y * row_bytes;
        for (png_uint_32 x = 0; x < w; ++x) {
            for (int c = 0; c < channels; ++c) {
                unsigned v;
                if (depth == 16) {
                    const std::size_t i = (static_cast<std::size_t>(x) * channels + c) * 2;
                    v = (static_cast<unsigned>(row[i]) << 8) | row[i + 1];  // PNG is big-endian
                } else {
                    v = row[static_cast<std::size_t>(x) * channels + c];
                }
                out.at(c, static_cast<int>(y), static_cast<int>(x)) = from_quant(v, maxval);
            }
        }
    }
    return out;
}

void save_png(const std::string& path, const Frame& frame, int bit_depth) {
    File file{std::fopen(path.c_str(), "wb")};
    if (file.f == nullptr) throw IoError("cannot open image for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_byte> row;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG: " + path);
    }

    png_init_io(png, file.f);
    const int color = frame.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width),
                 static_cast<png_uint_32>(frame.height), bit_depth, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const unsigned maxval = bit_depth == 16 ? 65535u : 255u;
    const std::size_t bytes_per_px = static_cast<std::size_t>(frame.channels) * (bit_depth / 8);
    row.resize(static_cast<std::size_t>(frame.width) * bytes_per_px);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            for (int c = 0; c < frame.channels; ++c) {
                const unsigned v = to_quant(frame.at(c, y, x), maxval);
                const std::size_t i = (static_cast<std::size_t>(x) * frame.channels + c) *
                                      (bit_depth / 8);
                if (bit_depth == 16) {
                    row[i] = static_cast<png_byte>(v >> 8);
                    row[i + 1] = static_cast<png_byte>(v & 0xff);
                } else {
                    row[i] = static_cast<png_byte>(v);
                }
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

int pnm_token(std::FILE* f) {
    // Skips whitespace and '#' comments, then parses a non-negative integer.
    int c = std::fgetc(f);
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = std::fgetc(f);
        } else if (std::isspace(c) != 0) {
            c = std::fgetc(f);
        } else {
            break;
        }
    }
    if (c == EOF || std::isdigit(c) == 0) return -1;
    int v = 0;
    while (c != EOF && std::isdigit(c) != 0) {
        v = v * 10 + (c - '0');
        c = std::fgetc(f);
    }
    return v;
}

Frame load_pnm(const std::string& path) {
    File file{std::fopen(path.c_str(), "rb")};
    if (file.f == nullptr) throw IoError("cannot open image: " + path);
    char magic[2];
    if (std::fread(magic, 1, 2, file.f) != 2 || magic[0] != 'P' ||
        (magic[1] != '5' && magic[1] != '6')) {
        throw IoError("not a binary PPM/PGM file: " + path);
    }
    const int channels = magic[1] == '6' ? 3 : 1;
    const int w = pnm_token(file.f);
    const int h = pnm_token(file.f);
    const int maxval = pnm_token(file.f);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
        throw IoError("bad PPM/PGM header in " + path);
    }
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * channels * bytes);
    if (std::fread(buf.data(), 1, buf.size(), file.f) != buf.size()) {
        throw IoError("truncated PPM/PGM data in " + path);
    }
    Frame out(w, h, channels);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < channels; ++c) {
                const std::size_t i =
                    ((static_cast<std::size_t>(y) * w + x) * channels + c) * bytes;
                const unsigned v = bytes == 2
                                       ? (static_cast<unsigned>(buf[i]) << 8) | buf[i + 1]
                                       : buf[i];
                out.at(c, y, x) = from_quant(v, static_cast<unsigned>(maxval));
            }
        }
    }
    return out;
}

void save_pnm(const std::string& path, const Frame& frame) {
    File file{std::fopen(path.c_str(), "wb")};
    if (file.f == nullptr) throw IoError("cannot open image for writing: " + path);
    std::fprintf(file.f, "P%c\n%d %d\n255\n", frame.channels == 3 ? '6' : '5', frame.width,
                 frame.height);
    std::vector<unsigned char> row(static_cast<std::size_t>(frame.width) * frame.channels);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            for (int c = 0; c < frame.channels; ++c) {
                row[static_cast<std::size_t>(x) * frame.channels + c] =
                    static_cast<unsigned char>(to_quant(frame.at(c, y, x), 255u));
            }
        }
        if (std::fwrite(row.data(), 1, row.size(), file.f) != row.size()) {
            throw IoError("write failed: " + path);
        }
    }
}

}  // namespace

Frame load_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") return load_png(path);
    if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return load_pnm(path);
    throw IoError("unsupported image format: " + path);
}

void save_image(const std::string& path, const Frame& frame, int bit_depth) {
    if (frame.channels != 1 && frame.channels != 3) {
        throw ShapeError("save_image: expected 1 or 3 channels, got " +
                         std::to_string(frame.channels));
    }
    if (bit_depth != 8 && bit_depth != 16) {
        throw IoError("save_image: bit depth must be 8 or 16");
    }
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        save_png(path, frame, bit_depth);
    } else if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
        save_pnm(path, frame);
    } else {
        throw IoError("unsupported image format: " + path);
    }
}

std::vector<std::string> list_frames(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = lower_ext(entry.path().filename().string());
        if (ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
            out.push_back(entry.path().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace dinw
