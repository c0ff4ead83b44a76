#include "patchcrf/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace patchcrf {

namespace {

// Pulls header tokens: whitespace-separated, '#' starts a comment running
// to end of line.
struct HeaderReader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void skip_space() {
        while (pos < bytes.size()) {
            const char c = static_cast<char>(bytes[pos]);
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' ||
                       c == '\v' || c == '\f') {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::size_t next_uint(const char* what) {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
            throw MalformedHeader(std::string("expected ") + what +
                                  " in Netpbm header");
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1000000000) throw MalformedHeader("header value overflow");
            ++pos;
        }
        return v;
    }
};

double luma(double r, double g, double b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

} // namespace

GrayImage decode_image(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2) throw MalformedHeader("file too short for a magic number");
    const char m0 = static_cast<char>(bytes[0]);
    const char m1 = static_cast<char>(bytes[1]);
    if (m0 != 'P' || m1 < '1' || m1 > '9')
        throw UnsupportedFormat("not a Netpbm file");
    const bool ascii = m1 == '2' || m1 == '3';
    const bool color = m1 == '3' || m1 == '6';
    if (m1 != '2' && m1 != '3' && m1 != '5' && m1 != '6')
        throw UnsupportedFormat(std::string("unsupported Netpbm magic P") + m1);

    HeaderReader hdr{bytes, 2};
    const std::size_t width = hdr.next_uint("width");
    const std::size_t height = hdr.next_uint("height");
    const std::size_t maxval = hdr.next_uint("maxval");
    if (width == 0 || height == 0) throw MalformedHeader("zero image dimension");
    if (maxval == 0 || maxval > 65535)
        throw MalformedHeader("maxval must be in [1, 65535]");

    const std::size_t channels = color ? 3 : 1;
    const std::size_t samples = width * height * channels;
    std::vector<double> raw(samples);

    if (ascii) {
        for (std::size_t i = 0; i < samples; ++i) {
            hdr.skip_space();
            if (hdr.pos >= bytes.size())
                throw TruncatedPayload("ASCII payload ended early at sample " +
                                       std::to_string(i));
            raw[i] = static_cast<double>(hdr.next_uint("sample"));
        }
    } else {
        // Exactly one whitespace byte separates the header from the payload.
        if (hdr.pos >= bytes.size() || !std::isspace(bytes[hdr.pos]))
            throw MalformedHeader("missing whitespace before binary payload");
        std::size_t p = hdr.pos + 1;
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        if (bytes.size() - p < samples * bytes_per)
            throw TruncatedPayload("binary payload has " +
                                   std::to_string(bytes.size() - p) +
                                   " bytes, need " +
                                   std::to_string(samples * bytes_per));
        for (std::size_t i = 0; i < samples; ++i) {
            if (bytes_per == 1) {
                raw[i] = bytes[p++];
            } else { // big-endian, per the Netpbm spec
                raw[i] = bytes[p] * 256.0 + bytes[p + 1];
                p += 2;
            }
        }
    }

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(width * height);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < width * height; ++i) {
        double v;
        if (color)
            v = luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]) * scale;
        else
            v = raw[i] * scale;
        img.pixels[i] = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

GrayImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open image file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_image(bytes);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    std::string header = "P5\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels) {
        const double c = std::clamp(v, 0.0, 1.0);
        out.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t out_w,
                          std::size_t out_h) {
    if (out_w == 0 || out_h == 0)
        throw ZeroTargetDimension("resize target must be at least 1x1");
    if (img.width == 0 || img.height == 0) throw Error("empty source image");
    if (out_w == img.width && out_h == img.height) return img;

    GrayImage out;
    out.width = out_w;
    out.height = out_h;
    out.pixels.resize(out_w * out_h);
    const double sx = static_cast<double>(img.width) / static_cast<double>(out_w);
    const double sy = static_cast<double>(img.height) / static_cast<double>(out_h);
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        const double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
        const double cy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
        const std::size_t y0 = static_cast<std::size_t>(cy);
        const std::size_t y1 = std::min(y0 + 1, img.height - 1);
        const double wy = cy - static_cast<double>(y0);
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            const double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
            const double cx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            const std::size_t x0 = static_cast<std::size_t>(cx);
            const std::size_t x1 = std::min(x0 + 1, img.width - 1);
            const double wx = cx - static_cast<double>(x0);
            const double top = img.at(y0, x0) * (1.0 - wx) + img.at(y0, x1) * wx;
            const double bot = img.at(y1, x0) * (1.0 - wx) + img.at(y1, x1) * wx;
            out.at(oy, ox) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

GrayImage crop(const GrayImage& img, const PatchRegion& region) {
    if (region.row0 + region.height > img.height ||
        region.col0 + region.width > img.width)
        throw Error("crop region exceeds image bounds");
    GrayImage out;
    out.width = region.width;
    out.height = region.height;
    out.pixels.resize(region.width * region.height);
    for (std::size_t r = 0; r < region.height; ++r)
        for (std::size_t c = 0; c < region.width; ++c)
            out.at(r, c) = img.at(region.row0 + r, region.col0 + c);
    return out;
}

} // namespace patchcrf
