#include "hyperrag/image.hpp"

#include "hyperrag/errors.hpp"

#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-enum-enum-conversion"
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#pragma GCC diagnostic pop

#include <fstream>

namespace hyperrag {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw Error(Errc::DecodeError, "image dimensions must be positive");
    }
    pixels_.assign(pixel_count(), fill);
}

void Image::fill_rect(int x, int y, int w, int h, Rgb c) {
    for (int yy = y; yy < y + h; ++yy) {
        for (int xx = x; xx < x + w; ++xx) {
            if (xx >= 0 && xx < width_ && yy >= 0 && yy < height_) {
                set(xx, yy, c);
            }
        }
    }
}

namespace {

Image from_mat(const cv::Mat& mat) {
    if (mat.empty() || mat.rows <= 0 || mat.cols <= 0) {
        throw Error(Errc::DecodeError, "undecodable or empty image");
    }
    cv::Mat bgr;
    if (mat.channels() == 3) {
        bgr = mat;
    } else if (mat.channels() == 1) {
        cv::cvtColor(mat, bgr, cv::COLOR_GRAY2BGR);
    } else if (mat.channels() == 4) {
        cv::cvtColor(mat, bgr, cv::COLOR_BGRA2BGR);
    } else {
        throw Error(Errc::DecodeError, "unsupported channel count");
    }
    Image img(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            img.set(x, y, Rgb{row[x][2], row[x][1], row[x][0]});
        }
    }
    return img;
}

cv::Mat to_mat(const Image& img) {
    cv::Mat mat(img.height(), img.width(), CV_8UC3);
    for (int y = 0; y < img.height(); ++y) {
        cv::Vec3b* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width(); ++x) {
            Rgb c = img.at(x, y);
            row[x] = cv::Vec3b(c.b, c.g, c.r);
        }
    }
    return mat;
}

} // namespace

Image Image::decode_file(const std::string& path) {
    cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (mat.empty()) {
        throw Error(Errc::DecodeError, "cannot decode image: " + path);
    }
    return from_mat(mat);
}

Image Image::decode_bytes(const std::vector<uint8_t>& bytes) {
    if (bytes.empty()) {
        throw Error(Errc::DecodeError, "empty image byte buffer");
    }
    cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                const_cast<uint8_t*>(bytes.data()));
    cv::Mat mat = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
    if (mat.empty()) {
        throw Error(Errc::DecodeError, "cannot decode image bytes");
    }
    return from_mat(mat);
}

std::vector<uint8_t> Image::encode_png() const {
    std::vector<uint8_t> out;
    if (!cv::imencode(".png", to_mat(*this), out)) {
        throw Error(Errc::IoError, "png encode failed");
    }
    return out;
}

void Image::write_png(const std::string& path) const {
    write_file_bytes(path, encode_png());
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot read file: " + path);
    }
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot write file: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(Errc::IoError, "short write: " + path);
    }
}

} // namespace hyperrag
