#include "pqpcp/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "pqpcp/error.hpp"

namespace pqpcp {

ImagePlane::ImagePlane(std::vector<DenseMatrix> channels) : channels_(std::move(channels)) {
    if (channels_.size() != 1 && channels_.size() != 3)
        throw DimensionError("an image needs 1 or 3 channels, got " + std::to_string(channels_.size()));
    for (const auto& c : channels_)
        if (!c.same_shape(channels_.front())) throw DimensionError("image channels differ in size");
}

bool ImagePlane::same_layout(const ImagePlane& other) const {
    return channel_count() == other.channel_count() && width() == other.width() && height() == other.height();
}

void NoiseSpec::validate() const {
    if (!(pixel_fraction >= 0.0 && pixel_fraction <= 1.0)) throw InvariantError("pixel fraction must lie in [0, 1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvariantError("noise sigma must be nonnegative");
}

ImagePlane corrupt(const ImagePlane& img, const NoiseSpec& spec) {
    spec.validate();
    std::mt19937_64 engine(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DenseMatrix> out;
    for (const auto& channel : img.channels()) {
        RowMajorMatrix m = channel.eigen();
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            if (unit(engine) < spec.pixel_fraction) m.data()[i] += spec.sigma * normal(engine);
        }
        out.emplace_back(std::move(m));
    }
    return ImagePlane(std::move(out));
}

DenoiseResult denoise(const ImagePlane& img, const SolverConfig& cfg) {
    std::vector<DenseMatrix> recovered;
    std::vector<SolverResult> results;
    for (std::size_t c = 0; c < img.channel_count(); ++c) {
        try {
            results.push_back(solve(img.channel(c), cfg));
        } catch (const NumericError& e) {
            throw NumericError("channel " + std::to_string(c) + ": " + e.what());
        } catch (const InvariantError& e) {
            throw InvariantError("channel " + std::to_string(c) + ": " + e.what());
        }
        recovered.push_back(results.back().l_star);
    }
    return DenoiseResult{ImagePlane(std::move(recovered)), std::move(results)};
}

double psnr(const ImagePlane& a, const ImagePlane& b) {
    if (!a.same_layout(b)) throw DimensionError("PSNR needs images of identical size and channel count");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < a.channel_count(); ++c) {
        sum += (a.channel(c).eigen() - b.channel(c).eigen()).squaredNorm();
        count += a.channel(c).size();
    }
    const double mse = sum / static_cast<double>(count);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double image_rse(const ImagePlane& reference, const ImagePlane& candidate) {
    if (!reference.same_layout(candidate)) throw DimensionError("RSE needs images of identical layout");
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < reference.channel_count(); ++c) {
        num += (candidate.channel(c).eigen() - reference.channel(c).eigen()).squaredNorm();
        den += reference.channel(c).eigen().squaredNorm();
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

namespace {

// Skips whitespace and '#' comments between header tokens.
void skip_separators(std::istream& in) {
    while (true) {
        const int ch = in.peek();
        if (ch == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\v' || ch == '\f') {
            in.get();
        } else {
            return;
        }
    }
}

std::size_t header_number(std::istream& in, const char* what) {
    skip_separators(in);
    std::size_t value = 0;
    bool any = false;
    while (std::isdigit(in.peek())) {
        value = value * 10 + static_cast<std::size_t>(in.get() - '0');
        any = true;
        if (value > 1'000'000) throw ParseError(std::string("PNM header: ") + what + " too large");
    }
    if (!any) throw ParseError(std::string("PNM header: missing ") + what);
    return value;
}

unsigned char encode(double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

} // namespace

ImagePlane read_pnm(std::istream& in) {
    char magic[2] = {0, 0};
    if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw ParseError("not a binary PGM (P5) or PPM (P6) image");
    const std::size_t channels = magic[1] == '5' ? 1 : 3;
    const std::size_t width = header_number(in, "width");
    const std::size_t height = header_number(in, "height");
    const std::size_t maxval = header_number(in, "maxval");
    if (width == 0 || height == 0) throw ParseError("PNM image has a zero dimension");
    if (maxval != 255) throw ParseError("only 8-bit PNM images (maxval 255) are supported");
    const int sep = in.get();
    if (sep != ' ' && sep != '\n' && sep != '\r' && sep != '\t') throw ParseError("PNM header not terminated by whitespace");

    std::vector<unsigned char> raw(width * height * channels);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw ParseError("PNM pixel data truncated");
    std::vector<std::vector<double>> planes(channels, std::vector<double>(width * height));
    for (std::size_t px = 0; px < width * height; ++px)
        for (std::size_t c = 0; c < channels; ++c) planes[c][px] = raw[px * channels + c] / 255.0;
    std::vector<DenseMatrix> mats;
    for (auto& p : planes) mats.emplace_back(height, width, std::move(p));
    return ImagePlane(std::move(mats));
}

void write_pnm(std::ostream& out, const ImagePlane& img) {
    const std::size_t channels = img.channel_count();
    out << (channels == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<unsigned char> raw(img.width() * img.height() * channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const auto data = img.channel(c).data();
        for (std::size_t px = 0; px < data.size(); ++px) raw[px * channels + c] = encode(data[px]);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

ImagePlane load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open image " + path.string());
    try {
        return read_pnm(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_image(const std::filesystem::path& path, const ImagePlane& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    write_pnm(out, img);
    if (!out) throw ParseError("write failed for " + path.string());
}

} // namespace pqpcp
