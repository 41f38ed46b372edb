#include "affect/types.hpp"

#include <stdexcept>

namespace affect {

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::EEG: return "eeg";
    case Modality::ECG: return "ecg";
    case Modality::GSR: return "gsr";
  }
  return "?";
}

std::size_t expected_channels(Modality m) {
  switch (m) {
    case Modality::EEG: return kEegChannels;
    case Modality::ECG: return kEcgChannels;
    case Modality::GSR: return kGsrChannels;
  }
  return 0;
}

const TrialRecord* Dataset::find(const std::string& key) const {
  for (const auto& t : trials) {
    if (t.key() == key) return &t;
  }
  return nullptr;
}

void FeatureVector::append(const FeatureVector& other) {
  if (other.names.size() != other.values.size()) {
    throw std::invalid_argument("FeatureVector: names/values length mismatch");
  }
  names.insert(names.end(), other.names.begin(), other.names.end());
  values.insert(values.end(), other.values.begin(), other.values.end());
}

}  // namespace affect
