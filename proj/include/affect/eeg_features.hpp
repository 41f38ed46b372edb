#pragma once

#include "affect/dsp.hpp"
#include "affect/error.hpp"
#include "affect/transforms.hpp"
#include "affect/types.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace affect::eeg {

enum class Band { Theta = 0, Alpha = 1, Beta = 2 };
inline constexpr std::array<Band, 3> kBands{Band::Theta, Band::Alpha, Band::Beta};

const char* band_name(Band b);
// [lo, hi) in Hz: theta 4-7, alpha 7-13, beta 13-30.
std::pair<double, double> band_limits(Band b);

inline constexpr int kEntropyFeatures = 91;     // C(14, 2)
inline constexpr int kPcaPerBand = 32;
inline constexpr int kEmbeddingFeatures = 96;   // 3 x 32
inline constexpr int kFeatureCount = kEntropyFeatures + kEmbeddingFeatures;

inline constexpr int kRasterSize = 224;
inline constexpr double kHeadCenter = 112.0;
inline constexpr double kHeadRadius = 105.0;

struct ElectrodeLayout {
  std::vector<std::string> names;
  std::vector<Point2> positions;  // unit disk, +y anterior, +x right

  // AF3 F7 F3 FC5 T7 P7 O1 O2 P8 T8 FC6 F4 F8 AF4 on an azimuthal projection.
  static ElectrodeLayout default_14();

  // Pixel coordinates (column, row) in the 224 x 224 raster.
  Point2 raster_position(std::size_t electrode) const;
};

std::vector<std::string> validate_layout(const ElectrodeLayout& l);
// CSV "name,x,y", header row plus 14 rows.
ElectrodeLayout read_layout_csv(const std::filesystem::path& path);
void write_layout_csv(const ElectrodeLayout& l, const std::filesystem::path& path);

struct TopoRaster {
  Band band{Band::Alpha};
  std::vector<double> grid;         // row-major kRasterSize^2
  std::vector<std::uint8_t> in_head; // same shape

  double at(int row, int col) const { return grid[static_cast<std::size_t>(row) * kRasterSize + col]; }
};

// FeatureVector of conditional entropies H(ch_j | ch_i) for i < j in layout
// order, named "ce_<name_i>_<name_j>".
FeatureVector eeg_entropy_features(const SignalBlock& eeg, const ElectrodeLayout& layout,
                                   int n_bins = dsp::kDefaultEntropyBins);

// [14 x 3] theta/alpha/beta power per channel from a whole-trial Welch PSD.
Matrix eeg_band_powers(const SignalBlock& eeg, double window_s = 1.0, double hop_s = 0.5);

// Inverse-distance (power 2) interpolation of electrode values onto the
// in-head disk, followed by min-max normalisation over in-head pixels. The
// normalised weight planes are computed once per layout.
class TopoRenderer {
 public:
  explicit TopoRenderer(ElectrodeLayout layout);

  TopoRaster render(std::span<const double> values, Band band = Band::Alpha) const;
  const ElectrodeLayout& layout() const { return layout_; }

 private:
  ElectrodeLayout layout_;
  std::vector<std::vector<double>> planes_;  // per electrode, kRasterSize^2 weights
  std::vector<std::uint8_t> mask_;
};

TopoRaster render_topomap(std::span<const double> band_values, const ElectrodeLayout& layout,
                          Band band = Band::Alpha);

class EmbeddingUnavailable : public DataError {
 public:
  explicit EmbeddingUnavailable(const std::string& what) : DataError(what) {}
};

struct EmbeddingKey {
  std::string trial_key;  // "<subject>/<video>"
  Band band{Band::Alpha};
};

// Maps a 224 x 224 raster to a 4096-vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> embed(const TopoRaster& r, const EmbeddingKey& key) const = 0;
};

// Bilinear resample 224 -> 64 per axis, flattened row-major.
class Stub64Embedder final : public EmbeddingProvider {
 public:
  std::string name() const override { return "stub64"; }
  std::vector<double> embed(const TopoRaster& r, const EmbeddingKey& key) const override;
};

// Reads <dir>/<subject>_<video>_<band>.csv in the embeddings CSV format
// (first row used), as written by the offline export tool.
class FileEmbedder final : public EmbeddingProvider {
 public:
  explicit FileEmbedder(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::string name() const override { return "file"; }
  std::vector<double> embed(const TopoRaster& r, const EmbeddingKey& key) const override;
  std::filesystem::path path_for(const EmbeddingKey& key) const;

 private:
  std::filesystem::path dir_;
};

std::unique_ptr<EmbeddingProvider> make_embedder(const std::string& kind,
                                                 const std::filesystem::path& dir = {});

std::vector<double> embed_topomap(const TopoRaster& r, const EmbeddingProvider& embedder,
                                  const EmbeddingKey& key = {});

struct TopoOptions {
  double window_s{1.0};
  double hop_s{0.5};
  bool log_power{false};  // render log10(power) instead of linear power
};

using BandEmbeddings = std::array<std::vector<double>, 3>;

// Band powers -> raster -> embedding, per band (theta, alpha, beta).
BandEmbeddings eeg_band_embeddings(const SignalBlock& eeg, const TopoRenderer& renderer,
                                   const EmbeddingProvider& embedder, const std::string& trial_key,
                                   const TopoOptions& opts = {});

struct EegPca {
  std::array<PcaModel, 3> per_band;  // k = 32 each, fit on training trials only
  bool fitted() const;
};

// PCA-projected embeddings, 32 per band, ordered theta, alpha, beta.
FeatureVector eeg_embedding_features(const BandEmbeddings& embeddings, const EegPca& pca);
FeatureVector eeg_embedding_features(const SignalBlock& eeg, const TopoRenderer& renderer,
                                     const EmbeddingProvider& embedder, const EegPca& pca,
                                     const std::string& trial_key = {}, const TopoOptions& opts = {});

// [91 entropy | 96 embedding]
FeatureVector eeg_features(const SignalBlock& eeg, const TopoRenderer& renderer,
                           const EmbeddingProvider& embedder, const EegPca& pca,
                           const std::string& trial_key = {}, const TopoOptions& opts = {},
                           int n_bins = dsp::kDefaultEntropyBins);

}  // namespace affect::eeg
