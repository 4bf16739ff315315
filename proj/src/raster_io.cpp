#include "robopose/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

namespace robopose {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw FormatError(name + ": " + image.message);
    }
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw FormatError(name + ": zero-dimension image");
    }
    image.format = PNG_FORMAT_GRAY;
    GrayImage out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    // Composite any alpha onto black.
    png_color background{0, 0, 0};
    if (!png_image_finish_read(&image, &background, out.pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw FormatError(name + ": " + msg);
    }
    return out;
}

// Netpbm header tokens, skipping '#' comments.
class PnmTokenizer {
public:
    explicit PnmTokenizer(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    long next_int(const std::string& name) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw FormatError(name + ": malformed PGM header");
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1'000'000'000L) throw FormatError(name + ": PGM value out of range");
        }
        return v;
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 2;
};

GrayImage decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
    const bool binary = bytes[1] == '5';
    PnmTokenizer tok(bytes);
    const long w = tok.next_int(name);
    const long h = tok.next_int(name);
    const long maxval = tok.next_int(name);
    if (w == 0 || h == 0) throw FormatError(name + ": zero-dimension image");
    if (maxval < 1 || maxval > 65535) throw FormatError(name + ": invalid PGM maxval");

    GrayImage out{static_cast<int>(w), static_cast<int>(h), {}};
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    out.pixels.resize(n);
    auto scale = [&](long v) -> std::uint8_t {
        if (v > maxval) throw FormatError(name + ": PGM sample exceeds maxval");
        return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    };

    if (binary) {
        tok.advance(1);  // single whitespace after maxval
        const std::size_t bps = maxval < 256 ? 1 : 2;
        if (bytes.size() < tok.pos() + n * bps) throw FormatError(name + ": truncated PGM data");
        const unsigned char* data = bytes.data() + tok.pos();
        for (std::size_t i = 0; i < n; ++i) {
            const long v = bps == 1 ? data[i] : (data[2 * i] << 8) | data[2 * i + 1];
            out.pixels[i] = scale(v);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) out.pixels[i] = scale(tok.next_int(name));
    }
    return out;
}

}  // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    const std::string name = path.string();
    static constexpr std::array<unsigned char, 8> kPngSig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) {
        return decode_png(bytes, name);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        return decode_pgm(bytes, name);
    }
    throw FormatError(name + ": unsupported raster format (expected PNG or PGM)");
}

void write_gray_image(const std::filesystem::path& path, const GrayImage& image) {
    if (image.width < 1 || image.height < 1) throw FormatError("cannot write zero-dimension image");
    const std::string ext = lower_extension(path);
    if (ext == ".pgm") {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
        if (!out) throw IoError("write failed: " + path.string());
        return;
    }
    if (ext != ".png") throw FormatError(path.string() + ": unsupported output extension");

    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.pixels.data(), 0, nullptr)) {
        throw IoError(path.string() + ": " + png.message);
    }
}

PixelGrid load_mask(const std::filesystem::path& path, int threshold) {
    if (threshold < 0 || threshold > 255) throw DomainError("threshold must be in [0, 255]");
    return threshold_image(read_gray_image(path), threshold);
}

void save_mask(const std::filesystem::path& path, const PixelGrid& grid) {
    write_gray_image(path, to_gray(grid));
}

}  // namespace robopose
