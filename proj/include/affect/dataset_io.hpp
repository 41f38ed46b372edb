#pragma once

#include "affect/types.hpp"
#include "affect/validate.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace affect {

struct LoadOptions {
  ValidationOptions validation;
  int threads{1};
};

struct LoadReport {
  std::vector<std::string> warnings;  // per-trial, non-fatal (e.g. missing modality file)
  std::vector<std::string> rejected;  // "<key>: <reason>" for skipped trials
};

// Reads a JSON manifest and every file it references. Paths are resolved
// relative to the manifest's directory. A malformed manifest throws
// DataError; a missing modality file only drops that modality; a trial whose
// file cannot be parsed, whose ratings leave [1, 9], or which fails
// validation is skipped and listed in the report.
Dataset load_manifest(const std::filesystem::path& path, const LoadOptions& opts = {},
                      LoadReport* report = nullptr);

// Writes manifest.json plus one CSV per modality per trial into dir. Numbers
// use the shortest decimal form that reads back to the same double.
std::filesystem::path write_dataset(const Dataset& d, const std::filesystem::path& dir);

// Signal CSV: "# rate_hz=<r>" comment, "ch1,...,chK" header, one row per sample.
SignalBlock read_signal_csv(const std::filesystem::path& path, Modality modality);
void write_signal_csv(const SignalBlock& s, const std::filesystem::path& path);

// "t_s,x1,y1,...,x49,y49"
std::vector<LandmarkFrame> read_landmarks_csv(const std::filesystem::path& path);
void write_landmarks_csv(const std::vector<LandmarkFrame>& frames, const std::filesystem::path& path);

// "t_s,e1,...,e4096"
std::vector<EmbeddingFrame> read_embeddings_csv(const std::filesystem::path& path);
void write_embeddings_csv(const std::vector<EmbeddingFrame>& frames, const std::filesystem::path& path);

}  // namespace affect
