// image.hpp
//
// Feature-vector to grayscale image export.  A weighted vector is laid out
// row-major over a sorted vocabulary into a 128x128 8-bit image, then passed
// through Gaussian blur, CLAHE and Sobel gradient magnitude.  All stages use
// clamp-to-edge borders and round to the nearest integer.

#ifndef CALLGRAM_IMAGE_HPP
#define CALLGRAM_IMAGE_HPP

#include "callgram/featurize.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace callgram {

inline constexpr int image_side = 128;
inline constexpr std::size_t image_pixels = static_cast<std::size_t>(image_side) * image_side;

enum class ImageStage { Raw, Blurred, Clahe, Sobel };

std::string_view to_string(ImageStage stage) noexcept;
std::optional<ImageStage> parse_stage(std::string_view name) noexcept;

struct FeatureImage {
    std::array<std::uint8_t, image_pixels> pixels{};
    ImageStage stage = ImageStage::Raw;

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y * image_side + x)]; }
    std::uint8_t &at(int x, int y) { return pixels[static_cast<std::size_t>(y * image_side + x)]; }
    /// clamp-to-edge read
    std::uint8_t clamped(int x, int y) const;

    bool operator==(const FeatureImage &) const = default;
};

struct BlurParams {
    int kernel_size = 3;  ///< odd
    double sigma = 1.0;
};

struct ClaheParams {
    int tiles_x = 8;  ///< must divide 128
    int tiles_y = 8;
    double clip_limit = 2.0;  ///< multiple of the uniform bin height; <= 0 disables clipping
};

/// Throws VocabTooLarge when the vocabulary exceeds 128*128 entries.
FeatureImage vector_to_image(const WeightedVector &vec, std::span<const std::string> vocab_order);

/// Normalized Gaussian kernel; throws UsageError for even or non-positive
/// sizes and non-positive sigma.
FeatureImage gaussian_blur(const FeatureImage &img, const BlurParams &params = {});

/// Per-tile histograms clipped at clip_limit * (tile area / 256); the
/// clipped excess is spread evenly over all 256 bins with any remainder
/// added one count per bin at a fixed stride from bin 0.  The tile mapping is
/// round(cdf * 255 / tile area); pixels blend the four nearest tile mappings
/// bilinearly, with tile centres at ((t + 0.5) * tile size) and the pixel
/// coordinate taken as its integer index.
FeatureImage clahe(const FeatureImage &img, const ClaheParams &params = {});

/// sqrt(Gx^2 + Gy^2) with the 3x3 Sobel kernels, clipped to 255.
FeatureImage sobel(const FeatureImage &img);

/// Runs the chain from a raw image up to and including `last`.
FeatureImage run_pipeline(const FeatureImage &raw, ImageStage last, const BlurParams &blur = {},
                          const ClaheParams &clahe_params = {});

std::string encode_png(const FeatureImage &img);
/// Throws IoError for undecodable data or a size other than 128x128.
FeatureImage decode_png(std::string_view bytes);

struct ImageSidecar {
    std::string sample_id;
    std::string vocab_sha;
    std::string params;
};

/// Writes `path` (PNG) and `<stem>.meta.txt` next to it.  Throws IoError.
void export_png(const FeatureImage &img, const std::filesystem::path &path, const ImageSidecar &meta);

std::filesystem::path sidecar_path(const std::filesystem::path &png_path);

}  // namespace callgram

#endif  // CALLGRAM_IMAGE_HPP
