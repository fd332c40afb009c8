#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowforge/sample.hpp"

namespace flowforge {

inline constexpr const char* kGeneratorVersion = "flowforge 0.1.0";
inline constexpr const char* kManifestName = "manifest.jsonl";

struct SampleEntry {
  std::uint64_t index = 0;
  std::string image1;  // paths relative to the dataset directory
  std::string image2;
  std::string flow;
};

struct DatasetManifest {
  std::string hyperparam_hash;
  std::uint64_t root_seed = 0;
  int width = 0;
  int height = 0;
  std::string generator_version = kGeneratorVersion;
  std::vector<SampleEntry> samples;
};

// Writes one sample's three files under `dir` and returns its entry. File
// names are derived from the index, so concurrent writers on disjoint
// indices never collide.
SampleEntry write_sample_files(const std::filesystem::path& dir, std::uint64_t index,
                               const RenderedSample& sample);

// Writes manifest.jsonl atomically (temp file + rename).
void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);

DatasetManifest read_manifest(const std::filesystem::path& dir);

// Streaming reader; samples load lazily, one at a time.
class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& dir);

  const DatasetManifest& manifest() const { return manifest_; }
  std::size_t size() const { return manifest_.samples.size(); }

  // Loads sample i; throws MissingFileError if a listed file is absent.
  RenderedSample load(std::size_t i) const;

  // Throws HashMismatchError when the manifest's hyperparameter hash differs.
  void verify_hash(const std::string& expected_hash) const;

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
};

}  // namespace flowforge
