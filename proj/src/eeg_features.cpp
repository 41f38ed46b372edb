#include "affect/eeg_features.hpp"

#include "affect/dataset_io.hpp"
#include "affect/simd/kernels.hpp"
#include "affect/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace affect::eeg {

namespace {

constexpr std::size_t kPixels = static_cast<std::size_t>(kRasterSize) * kRasterSize;
constexpr int kStubSide = 64;

bool in_head(int row, int col) {
  const double dr = row - kHeadCenter;
  const double dc = col - kHeadCenter;
  return dr * dr + dc * dc <= kHeadRadius * kHeadRadius;
}

void require_eeg(const SignalBlock& eeg, const ElectrodeLayout& layout) {
  if (eeg.channel_count() != layout.names.size()) {
    throw std::invalid_argument("EEG block has " + std::to_string(eeg.channel_count()) +
                                " channels, layout has " + std::to_string(layout.names.size()));
  }
}

}  // namespace

const char* band_name(Band b) {
  switch (b) {
    case Band::Theta: return "theta";
    case Band::Alpha: return "alpha";
    case Band::Beta: return "beta";
  }
  return "?";
}

std::pair<double, double> band_limits(Band b) {
  switch (b) {
    case Band::Theta: return {4.0, 7.0};
    case Band::Alpha: return {7.0, 13.0};
    case Band::Beta: return {13.0, 30.0};
  }
  return {0.0, 0.0};
}

ElectrodeLayout ElectrodeLayout::default_14() {
  ElectrodeLayout l;
  l.names = {"AF3", "F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8", "AF4"};
  l.positions = {{-0.265912, 0.626450},  {-0.689161, 0.500705}, {-0.349619, 0.431743},
                 {-0.613736, 0.235591},  {-0.851850, 0.0},      {-0.689161, -0.500705},
                 {-0.263236, -0.810157}, {0.263236, -0.810157}, {0.689161, -0.500705},
                 {0.851850, 0.0},        {0.613736, 0.235591},  {0.349619, 0.431743},
                 {0.689161, 0.500705},   {0.265912, 0.626450}};
  return l;
}

Point2 ElectrodeLayout::raster_position(std::size_t electrode) const {
  const Point2 p = positions.at(electrode);
  return {kHeadCenter + p.x * kHeadRadius, kHeadCenter - p.y * kHeadRadius};
}

std::vector<std::string> validate_layout(const ElectrodeLayout& l) {
  std::vector<std::string> out;
  if (l.names.size() != kEegChannels || l.positions.size() != kEegChannels) {
    out.push_back("layout must have exactly 14 electrodes");
  }
  if (std::set<std::string>(l.names.begin(), l.names.end()).size() != l.names.size()) {
    out.push_back("electrode names must be unique");
  }
  for (std::size_t i = 0; i < l.positions.size(); ++i) {
    const auto& p = l.positions[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || std::hypot(p.x, p.y) > 1.0) {
      out.push_back("electrode " + (i < l.names.size() ? l.names[i] : std::to_string(i)) +
                    " outside the unit disk");
    }
  }
  return out;
}

ElectrodeLayout read_layout_csv(const std::filesystem::path& path) {
  const std::string buf = text::read_file(path);
  text::LineReader lines(buf);
  std::string_view line;
  ElectrodeLayout l;
  bool header = false;
  while (lines.next(line)) {
    const auto s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto f = text::split(s);
    if (f.size() != 3) throw DataError(path.string() + ": layout rows must be name,x,y");
    const std::string where = path.filename().string() + ":" + std::to_string(lines.line_number());
    l.names.emplace_back(text::trim(f[0]));
    l.positions.push_back({text::parse_double(f[1], where), text::parse_double(f[2], where)});
  }
  const auto problems = validate_layout(l);
  if (!problems.empty()) throw DataError(path.string() + ": " + problems.front());
  return l;
}

void write_layout_csv(const ElectrodeLayout& l, const std::filesystem::path& path) {
  std::string out = "name,x,y\n";
  for (std::size_t i = 0; i < l.names.size(); ++i) {
    out += l.names[i] + "," + text::format_double(l.positions[i].x) + "," +
           text::format_double(l.positions[i].y) + "\n";
  }
  text::write_file(path, out);
}

FeatureVector eeg_entropy_features(const SignalBlock& eeg, const ElectrodeLayout& layout, int n_bins) {
  require_eeg(eeg, layout);
  const std::size_t nch = eeg.channel_count();
  if (eeg.n_samples() < 2) throw std::invalid_argument("eeg_entropy_features: need at least 2 samples");
  std::vector<std::vector<int>> bins(nch);
  for (std::size_t c = 0; c < nch; ++c) bins[c] = dsp::histogram_bins(eeg.channel(c), n_bins);

  FeatureVector fv;
  for (std::size_t i = 0; i < nch; ++i) {
    for (std::size_t j = i + 1; j < nch; ++j) {
      fv.names.push_back("ce_" + layout.names[i] + "_" + layout.names[j]);
      fv.values.push_back(dsp::conditional_entropy_binned(bins[j], bins[i], n_bins));
    }
  }
  return fv;
}

Matrix eeg_band_powers(const SignalBlock& eeg, double window_s, double hop_s) {
  Matrix out(static_cast<Eigen::Index>(eeg.channel_count()), 3);
  for (std::size_t c = 0; c < eeg.channel_count(); ++c) {
    const auto psd = dsp::welch_psd(eeg.channel(c), eeg.sample_rate_hz, window_s, hop_s);
    for (Band b : kBands) {
      const auto [lo, hi] = band_limits(b);
      out(static_cast<Eigen::Index>(c), static_cast<int>(b)) = dsp::band_power(psd, lo, hi);
    }
  }
  return out;
}

TopoRenderer::TopoRenderer(ElectrodeLayout layout) : layout_(std::move(layout)) {
  const auto problems = validate_layout(layout_);
  if (!problems.empty()) throw std::invalid_argument("TopoRenderer: " + problems.front());
  const std::size_t ne = layout_.names.size();
  std::vector<Point2> at(ne);
  for (std::size_t e = 0; e < ne; ++e) at[e] = layout_.raster_position(e);

  planes_.assign(ne, std::vector<double>(kPixels, 0.0));
  mask_.assign(kPixels, 0);
  std::vector<double> w(ne);
  for (int r = 0; r < kRasterSize; ++r) {
    for (int c = 0; c < kRasterSize; ++c) {
      if (!in_head(r, c)) continue;
      const std::size_t p = static_cast<std::size_t>(r) * kRasterSize + c;
      mask_[p] = 1;
      std::size_t hit = ne;
      double total = 0.0;
      for (std::size_t e = 0; e < ne; ++e) {
        const double dx = c - at[e].x;
        const double dy = r - at[e].y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < 1e-18) {
          hit = e;
          break;
        }
        w[e] = 1.0 / d2;
        total += w[e];
      }
      if (hit < ne) {
        planes_[hit][p] = 1.0;
        continue;
      }
      for (std::size_t e = 0; e < ne; ++e) planes_[e][p] = w[e] / total;
    }
  }
}

TopoRaster TopoRenderer::render(std::span<const double> values, Band band) const {
  if (values.size() != planes_.size()) {
    throw std::invalid_argument("render_topomap: expected " + std::to_string(planes_.size()) + " values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("render_topomap: non-finite electrode value");
  }
  const auto& k = simd::active();
  TopoRaster r;
  r.band = band;
  r.in_head = mask_;
  r.grid.assign(kPixels, 0.0);
  for (std::size_t e = 0; e < planes_.size(); ++e) {
    k.axpy(values[e], planes_[e].data(), r.grid.data(), kPixels);
  }

  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t p = 0; p < kPixels; ++p) {
    if (!mask_[p]) continue;
    lo = std::min(lo, r.grid[p]);
    hi = std::max(hi, r.grid[p]);
  }
  const bool flat = !(hi > lo) ||
                    std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
  for (std::size_t p = 0; p < kPixels; ++p) {
    if (!mask_[p]) {
      r.grid[p] = 0.0;
    } else if (flat) {
      r.grid[p] = 0.5;
    } else {
      r.grid[p] = std::clamp((r.grid[p] - lo) / (hi - lo), 0.0, 1.0);
    }
  }
  return r;
}

TopoRaster render_topomap(std::span<const double> band_values, const ElectrodeLayout& layout, Band band) {
  return TopoRenderer(layout).render(band_values, band);
}

std::vector<double> Stub64Embedder::embed(const TopoRaster& r, const EmbeddingKey&) const {
  if (r.grid.size() != kPixels) throw EmbeddingUnavailable("stub64: raster must be 224 x 224");
  constexpr double scale = static_cast<double>(kRasterSize) / kStubSide;
  std::vector<double> out(kEmbeddingDim);
  // Sample positions align cell centres: src = (i + 0.5) * 3.5 - 0.5.
  auto coord = [&](int i, int& i0, int& i1, double& frac) {
    const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, kRasterSize - 1.0);
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, kRasterSize - 1);
    frac = s - i0;
  };
  for (int i = 0; i < kStubSide; ++i) {
    int r0, r1;
    double fr;
    coord(i, r0, r1, fr);
    for (int j = 0; j < kStubSide; ++j) {
      int c0, c1;
      double fc;
      coord(j, c0, c1, fc);
      const double top = (1.0 - fc) * r.at(r0, c0) + fc * r.at(r0, c1);
      const double bottom = (1.0 - fc) * r.at(r1, c0) + fc * r.at(r1, c1);
      out[static_cast<std::size_t>(i) * kStubSide + j] = (1.0 - fr) * top + fr * bottom;
    }
  }
  return out;
}

std::filesystem::path FileEmbedder::path_for(const EmbeddingKey& key) const {
  std::string stem = key.trial_key;
  std::replace(stem.begin(), stem.end(), '/', '_');
  return dir_ / (stem + "_" + band_name(key.band) + ".csv");
}

std::vector<double> FileEmbedder::embed(const TopoRaster&, const EmbeddingKey& key) const {
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) {
    throw EmbeddingUnavailable("embedding-unavailable: no precomputed vector at " + path.string());
  }
  std::vector<EmbeddingFrame> frames;
  try {
    frames = read_embeddings_csv(path);
  } catch (const DataError& e) {
    throw EmbeddingUnavailable(std::string("embedding-unavailable: ") + e.what());
  }
  if (frames.empty() || frames.front().vector.size() != kEmbeddingDim) {
    throw EmbeddingUnavailable("embedding-unavailable: " + path.string() + " must hold a 4096-value row");
  }
  return frames.front().vector;
}

std::unique_ptr<EmbeddingProvider> make_embedder(const std::string& kind, const std::filesystem::path& dir) {
  if (kind == "stub64") return std::make_unique<Stub64Embedder>();
  if (kind == "file") {
    if (dir.empty()) throw ConfigError("embedder 'file' needs a directory");
    return std::make_unique<FileEmbedder>(dir);
  }
  throw ConfigError("unknown embedder '" + kind + "' (expected stub64 or file)");
}

std::vector<double> embed_topomap(const TopoRaster& r, const EmbeddingProvider& embedder,
                                  const EmbeddingKey& key) {
  auto v = embedder.embed(r, key);
  if (v.size() != kEmbeddingDim) {
    throw EmbeddingUnavailable("embedding-unavailable: provider " + embedder.name() + " returned " +
                               std::to_string(v.size()) + " values");
  }
  return v;
}

BandEmbeddings eeg_band_embeddings(const SignalBlock& eeg, const TopoRenderer& renderer,
                                   const EmbeddingProvider& embedder, const std::string& trial_key,
                                   const TopoOptions& opts) {
  require_eeg(eeg, renderer.layout());
  const Matrix powers = eeg_band_powers(eeg, opts.window_s, opts.hop_s);
  BandEmbeddings out;
  std::vector<double> values(eeg.channel_count());
  for (Band b : kBands) {
    for (std::size_t c = 0; c < values.size(); ++c) {
      const double p = powers(static_cast<Eigen::Index>(c), static_cast<int>(b));
      values[c] = opts.log_power ? std::log10(std::max(p, 1e-300)) : p;
    }
    const TopoRaster r = renderer.render(values, b);
    out[static_cast<int>(b)] = embed_topomap(r, embedder, {trial_key, b});
  }
  return out;
}

bool EegPca::fitted() const {
  return std::all_of(per_band.begin(), per_band.end(), [](const PcaModel& m) { return m.fitted(); });
}

FeatureVector eeg_embedding_features(const BandEmbeddings& embeddings, const EegPca& pca) {
  if (!pca.fitted()) throw std::invalid_argument("eeg_embedding_features: PCA models not fitted");
  FeatureVector fv;
  for (Band b : kBands) {
    const auto& e = embeddings[static_cast<int>(b)];
    const Matrix row = Eigen::Map<const Matrix>(e.data(), 1, static_cast<Eigen::Index>(e.size()));
    const Matrix y = pca_transform(pca.per_band[static_cast<int>(b)], row);
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
      fv.names.push_back(std::string("topo_") + band_name(b) + "_pc" + std::to_string(k + 1));
      fv.values.push_back(y(0, k));
    }
  }
  return fv;
}

FeatureVector eeg_embedding_features(const SignalBlock& eeg, const TopoRenderer& renderer,
                                     const EmbeddingProvider& embedder, const EegPca& pca,
                                     const std::string& trial_key, const TopoOptions& opts) {
  if (!pca.fitted()) throw std::invalid_argument("eeg_embedding_features: PCA models not fitted");
  return eeg_embedding_features(eeg_band_embeddings(eeg, renderer, embedder, trial_key, opts), pca);
}

FeatureVector eeg_features(const SignalBlock& eeg, const TopoRenderer& renderer,
                           const EmbeddingProvider& embedder, const EegPca& pca,
                           const std::string& trial_key, const TopoOptions& opts, int n_bins) {
  FeatureVector fv = eeg_entropy_features(eeg, renderer.layout(), n_bins);
  fv.append(eeg_embedding_features(eeg, renderer, embedder, pca, trial_key, opts));
  return fv;
}

}  // namespace affect::eeg
