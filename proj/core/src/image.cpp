#include "wireforge/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "wireforge/errors.hpp"

namespace wireforge {

namespace {

cv::Mat to_mat8(const Image& img) {
    cv::Mat m(img.height, img.width, CV_8UC1);
    const auto q = quantize(img);
    std::copy(q.begin(), q.end(), m.ptr<unsigned char>(0));
    return m;
}

Image from_mat(const cv::Mat& decoded) {
    if (decoded.empty()) throw Error("image could not be decoded");
    cv::Mat gray;
    if (decoded.channels() == 1) {
        gray = decoded;
    } else if (decoded.channels() == 4) {
        cv::cvtColor(decoded, gray, cv::COLOR_BGRA2GRAY);
    } else {
        cv::cvtColor(decoded, gray, cv::COLOR_BGR2GRAY);
    }
    // Divide (not multiply by a reciprocal) so 8-bit level k reads back as exactly k / 255.
    const double full = gray.depth() == CV_16U ? 65535.0 : 255.0;
    cv::Mat f;
    gray.convertTo(f, CV_64F);
    Image out(f.cols, f.rows);
    for (int y = 0; y < f.rows; ++y)
        for (int x = 0; x < f.cols; ++x) out.at(x, y) = std::clamp(f.at<double>(y, x) / full, 0.0, 1.0);
    return out;
}

}  // namespace

unsigned char quantize(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<unsigned char> quantize(const Image& img) {
    std::vector<unsigned char> out(img.size());
    std::transform(img.data.begin(), img.data.end(), out.begin(), [](double v) { return quantize(v); });
    return out;
}

void write_image(const Image& img, const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    std::vector<int> params;
    if (ext == ".pgm") params = {cv::IMWRITE_PXM_BINARY, 1};
    else if (ext == ".png") params = {cv::IMWRITE_PNG_COMPRESSION, 6};
    else throw Error("unsupported image extension '" + ext + "' (use .png or .pgm)");
    if (!cv::imwrite(path.string(), to_mat8(img), params)) throw Error("failed to write " + path.string());
}

Image read_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error("image not found: " + path.string());
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty()) throw Error("unreadable image: " + path.string());
    return from_mat(m);
}

std::vector<unsigned char> encode_png(const Image& img) {
    std::vector<unsigned char> buf;
    if (!cv::imencode(".png", to_mat8(img), buf)) throw Error("PNG encoding failed");
    return buf;
}

Image decode_png(std::span<const unsigned char> bytes) {
    cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<unsigned char*>(bytes.data()));
    return from_mat(cv::imdecode(raw, cv::IMREAD_UNCHANGED));
}

Image resize(const Image& img, int w, int h) {
    if (img.width == w && img.height == h) return img;
    cv::Mat src(img.height, img.width, CV_64F, const_cast<double*>(img.data.data()));
    cv::Mat dst;
    cv::resize(src, dst, cv::Size(w, h), 0, 0, cv::INTER_AREA);
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = std::clamp(dst.at<double>(y, x), 0.0, 1.0);
    out.view = img.view;
    return out;
}

}  // namespace wireforge
