#include "callgram/image.hpp"

#include "callgram/error.hpp"
#include "callgram/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace callgram {

namespace {

std::uint8_t to_pixel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

std::string_view to_string(ImageStage stage) noexcept {
    switch (stage) {
    case ImageStage::Raw: return "raw";
    case ImageStage::Blurred: return "blurred";
    case ImageStage::Clahe: return "clahe";
    case ImageStage::Sobel: return "sobel";
    }
    return "raw";
}

std::optional<ImageStage> parse_stage(std::string_view name) noexcept {
    for (auto s : {ImageStage::Raw, ImageStage::Blurred, ImageStage::Clahe, ImageStage::Sobel}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

std::uint8_t FeatureImage::clamped(int x, int y) const {
    return at(std::clamp(x, 0, image_side - 1), std::clamp(y, 0, image_side - 1));
}

FeatureImage vector_to_image(const WeightedVector &vec, std::span<const std::string> vocab_order) {
    if (vocab_order.size() > image_pixels) {
        throw Error{ErrorCode::VocabTooLarge,
                    "vocabulary has " + std::to_string(vocab_order.size()) + " tokens, image holds " +
                        std::to_string(image_pixels) + "; retrain with a smaller --top-k"};
    }
    // padding cells take part in the min-max range as zeros
    std::vector<double> values(image_pixels, 0.0);
    for (std::size_t i = 0; i < vocab_order.size(); ++i) {
        if (auto it = vec.weights.find(vocab_order[i]); it != vec.weights.end()) values[i] = it->second;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double range = *hi - *lo;

    FeatureImage img;
    img.stage = ImageStage::Raw;
    if (range > 0.0) {
        for (std::size_t i = 0; i < image_pixels; ++i) {
            img.pixels[i] = to_pixel(255.0 * (values[i] - min) / range);
        }
    }
    return img;
}

FeatureImage gaussian_blur(const FeatureImage &img, const BlurParams &params) {
    if (params.kernel_size < 1 || params.kernel_size % 2 == 0) {
        throw Error{ErrorCode::UsageError, "blur kernel size must be odd and positive"};
    }
    if (!(params.sigma > 0.0)) {
        throw Error{ErrorCode::UsageError, "blur sigma must be positive"};
    }
    const int r = params.kernel_size / 2;
    const int k = params.kernel_size;
    std::vector<double> kernel(static_cast<std::size_t>(k * k));
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * params.sigma * params.sigma));
            kernel[static_cast<std::size_t>((dy + r) * k + (dx + r))] = w;
            sum += w;
        }
    }
    for (auto &w : kernel) w /= sum;

    FeatureImage out;
    out.stage = ImageStage::Blurred;
    for (int y = 0; y < image_side; ++y) {
        for (int x = 0; x < image_side; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    acc += kernel[static_cast<std::size_t>((dy + r) * k + (dx + r))] * img.clamped(x + dx, y + dy);
            out.at(x, y) = to_pixel(acc);
        }
    }
    return out;
}

FeatureImage clahe(const FeatureImage &img, const ClaheParams &params) {
    if (params.tiles_x < 1 || params.tiles_y < 1 || image_side % params.tiles_x != 0 ||
        image_side % params.tiles_y != 0) {
        throw Error{ErrorCode::UsageError, "CLAHE tile counts must divide 128"};
    }
    constexpr int bins = 256;
    const int tile_w = image_side / params.tiles_x;
    const int tile_h = image_side / params.tiles_y;
    const int area = tile_w * tile_h;
    int clip = 0;
    if (params.clip_limit > 0.0) {
        clip = std::max(static_cast<int>(params.clip_limit * area / bins), 1);
    }

    using Lut = std::array<std::uint8_t, bins>;
    std::vector<Lut> luts(static_cast<std::size_t>(params.tiles_x * params.tiles_y));
    for (int ty = 0; ty < params.tiles_y; ++ty) {
        for (int tx = 0; tx < params.tiles_x; ++tx) {
            std::array<int, bins> hist{};
            for (int y = ty * tile_h; y < (ty + 1) * tile_h; ++y)
                for (int x = tx * tile_w; x < (tx + 1) * tile_w; ++x) ++hist[img.at(x, y)];

            if (clip > 0) {
                int excess = 0;
                for (auto &h : hist) {
                    if (h > clip) {
                        excess += h - clip;
                        h = clip;
                    }
                }
                const int batch = excess / bins;
                int residual = excess - batch * bins;
                for (auto &h : hist) h += batch;
                if (residual > 0) {
                    const int step = std::max(bins / residual, 1);
                    for (int i = 0; i < bins && residual > 0; i += step, --residual) ++hist[static_cast<std::size_t>(i)];
                }
            }

            Lut &lut = luts[static_cast<std::size_t>(ty * params.tiles_x + tx)];
            int cdf = 0;
            for (int i = 0; i < bins; ++i) {
                cdf += hist[static_cast<std::size_t>(i)];
                lut[static_cast<std::size_t>(i)] = to_pixel(static_cast<double>(cdf) * 255.0 / area);
            }
        }
    }

    FeatureImage out;
    out.stage = ImageStage::Clahe;
    for (int y = 0; y < image_side; ++y) {
        const double tyf = static_cast<double>(y) / tile_h - 0.5;
        int ty1 = static_cast<int>(std::floor(tyf));
        int ty2 = ty1 + 1;
        const double ya = tyf - ty1;
        ty1 = std::max(ty1, 0);
        ty2 = std::min(ty2, params.tiles_y - 1);
        for (int x = 0; x < image_side; ++x) {
            const double txf = static_cast<double>(x) / tile_w - 0.5;
            int tx1 = static_cast<int>(std::floor(txf));
            int tx2 = tx1 + 1;
            const double xa = txf - tx1;
            tx1 = std::max(tx1, 0);
            tx2 = std::min(tx2, params.tiles_x - 1);

            const auto v = img.at(x, y);
            auto lut = [&](int ty, int tx) {
                return static_cast<double>(luts[static_cast<std::size_t>(ty * params.tiles_x + tx)][v]);
            };
            const double res = (lut(ty1, tx1) * (1.0 - xa) + lut(ty1, tx2) * xa) * (1.0 - ya) +
                               (lut(ty2, tx1) * (1.0 - xa) + lut(ty2, tx2) * xa) * ya;
            out.at(x, y) = to_pixel(res);
        }
    }
    return out;
}

FeatureImage sobel(const FeatureImage &img) {
    FeatureImage out;
    out.stage = ImageStage::Sobel;
    for (int y = 0; y < image_side; ++y) {
        for (int x = 0; x < image_side; ++x) {
            auto p = [&](int dx, int dy) { return static_cast<int>(img.clamped(x + dx, y + dy)); };
            const int gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
            const int gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
            const double mag = std::sqrt(static_cast<double>(gx * gx + gy * gy));
            out.at(x, y) = to_pixel(std::min(mag, 255.0));
        }
    }
    return out;
}

FeatureImage run_pipeline(const FeatureImage &raw, ImageStage last, const BlurParams &blur,
                          const ClaheParams &clahe_params) {
    FeatureImage img = raw;
    if (last == ImageStage::Raw) return img;
    img = gaussian_blur(img, blur);
    if (last == ImageStage::Blurred) return img;
    img = clahe(img, clahe_params);
    if (last == ImageStage::Clahe) return img;
    return sobel(img);
}

std::string encode_png(const FeatureImage &img) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = image_side;
    image.height = image_side;
    image.format = PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error{ErrorCode::IoError, "png encode failed: " + msg};
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error{ErrorCode::IoError, "png encode failed: " + msg};
    }
    out.resize(size);
    return out;
}

FeatureImage decode_png(std::string_view bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error{ErrorCode::IoError, "png decode failed: " + msg};
    }
    if (image.width != image_side || image.height != image_side) {
        png_image_free(&image);
        throw Error{ErrorCode::IoError, "png is not 128x128"};
    }
    image.format = PNG_FORMAT_GRAY;
    FeatureImage img;
    if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error{ErrorCode::IoError, "png decode failed: " + msg};
    }
    return img;
}

std::filesystem::path sidecar_path(const std::filesystem::path &png_path) {
    auto p = png_path;
    p.replace_extension(".meta.txt");
    return p;
}

void export_png(const FeatureImage &img, const std::filesystem::path &path, const ImageSidecar &meta) {
    write_file_atomic(path, encode_png(img));
    std::string text = "sample_id " + meta.sample_id + "\n" + "stage " + std::string{to_string(img.stage)} +
                       "\n" + "vocab_sha " + meta.vocab_sha + "\n" + "params " + meta.params + "\n";
    write_file_atomic(sidecar_path(path), text);
}

}  // namespace callgram
