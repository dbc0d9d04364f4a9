#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pqpcp/matrix.hpp"
#include "pqpcp/solver.hpp"

namespace pqpcp {

/// Grayscale (1 channel) or color (3 channels) image, one height x width
/// matrix per channel. Values are nominally in [0, 1] but are not clamped
/// here; clamping happens only when encoding to 8-bit.
class ImagePlane {
public:
    explicit ImagePlane(std::vector<DenseMatrix> channels);

    std::size_t width() const { return channels_.front().cols(); }
    std::size_t height() const { return channels_.front().rows(); }
    std::size_t channel_count() const { return channels_.size(); }
    const DenseMatrix& channel(std::size_t c) const { return channels_.at(c); }
    const std::vector<DenseMatrix>& channels() const { return channels_; }

    bool same_layout(const ImagePlane& other) const;

private:
    std::vector<DenseMatrix> channels_;
};

struct NoiseSpec {
    double pixel_fraction = 0.5;
    double sigma = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Each pixel of each channel independently receives N(0, sigma^2) with
/// probability pixel_fraction. Deterministic per seed.
ImagePlane corrupt(const ImagePlane& img, const NoiseSpec& spec);

struct DenoiseResult {
    ImagePlane recovered;
    std::vector<SolverResult> channel_results; ///< one per channel, in channel order
};

/// Decomposes every channel independently and keeps the low-rank parts.
DenoiseResult denoise(const ImagePlane& img, const SolverConfig& cfg);

/// 10 log10(1 / MSE) over all pixels and channels, peak value 1.
/// Identical images give +infinity.
double psnr(const ImagePlane& a, const ImagePlane& b);

/// ||candidate - reference||_F / ||reference||_F over all channels.
double image_rse(const ImagePlane& reference, const ImagePlane& candidate);

// Binary PGM (P5) / PPM (P6), maxval 255. Pixel v decodes to v / 255;
// encoding clamps to [0, 1] and rounds to nearest.
ImagePlane read_pnm(std::istream& in);
void write_pnm(std::ostream& out, const ImagePlane& img);
ImagePlane load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const ImagePlane& img);

} // namespace pqpcp
