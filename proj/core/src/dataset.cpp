#include "flowforge/dataset.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "flowforge/flow_io.hpp"
#include "flowforge/image_io.hpp"

namespace flowforge {

using json = nlohmann::ordered_json;

namespace {

std::string sample_stem(std::uint64_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(index));
  return std::string(buf);
}

}  // namespace

SampleEntry write_sample_files(const std::filesystem::path& dir, std::uint64_t index,
                               const RenderedSample& sample) {
  std::filesystem::create_directories(dir);
  SampleEntry entry;
  entry.index = index;
  const std::string stem = sample_stem(index);
  entry.image1 = stem + "_img1.png";
  entry.image2 = stem + "_img2.png";
  entry.flow = stem + "_flow.flo";
  write_png(dir / entry.image1, sample.image1);
  write_png(dir / entry.image2, sample.image2);
  write_flo_file(dir / entry.flow, sample.flow);
  return entry;
}

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = dir / (std::string(kManifestName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + tmp.string());
    json header = {{"type", "header"},
                   {"hyperparam_hash", manifest.hyperparam_hash},
                   {"root_seed", manifest.root_seed},
                   {"count", manifest.samples.size()},
                   {"width", manifest.width},
                   {"height", manifest.height},
                   {"generator_version", manifest.generator_version}};
    out << header.dump() << "\n";
    for (const SampleEntry& s : manifest.samples) {
      json line = {{"type", "sample"},
                   {"index", s.index},
                   {"image1", s.image1},
                   {"image2", s.image2},
                   {"flow", s.flow}};
      out << line.dump() << "\n";
    }
  }
  std::filesystem::rename(tmp, dir / kManifestName);
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw MissingFileError("no manifest at " + path.string());

  DatasetManifest m;
  std::string line;
  bool have_header = false;
  std::size_t declared_count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw IoError("malformed manifest line: " + std::string(e.what()));
    }
    const std::string type = j.value("type", "");
    if (type == "header") {
      m.hyperparam_hash = j.value("hyperparam_hash", "");
      m.root_seed = j.value("root_seed", std::uint64_t{0});
      declared_count = j.value("count", std::size_t{0});
      m.width = j.value("width", 0);
      m.height = j.value("height", 0);
      m.generator_version = j.value("generator_version", "");
      have_header = true;
    } else if (type == "sample") {
      SampleEntry s;
      s.index = j.value("index", std::uint64_t{0});
      s.image1 = j.at("image1").get<std::string>();
      s.image2 = j.at("image2").get<std::string>();
      s.flow = j.at("flow").get<std::string>();
      m.samples.push_back(std::move(s));
    } else {
      throw IoError("unknown manifest record type: " + type);
    }
  }
  if (!have_header) throw MissingFileError("manifest has no header record");
  if (declared_count != m.samples.size()) {
    throw MissingFileError("manifest count " + std::to_string(declared_count) +
                           " does not match its " + std::to_string(m.samples.size()) +
                           " sample records");
  }
  return m;
}

DatasetReader::DatasetReader(const std::filesystem::path& dir)
    : dir_(dir), manifest_(read_manifest(dir)) {
  for (const SampleEntry& s : manifest_.samples) {
    for (const std::string& rel : {s.image1, s.image2, s.flow}) {
      if (!std::filesystem::exists(dir_ / rel))
        throw MissingFileError("dataset file listed in manifest is missing: " + rel);
    }
  }
}

RenderedSample DatasetReader::load(std::size_t i) const {
  if (i >= manifest_.samples.size())
    throw MissingFileError("sample index " + std::to_string(i) + " out of range");
  const SampleEntry& s = manifest_.samples[i];
  RenderedSample out;
  out.image1 = read_image(dir_ / s.image1);
  out.image2 = read_image(dir_ / s.image2);
  out.flow = read_flo_file(dir_ / s.flow);
  out.provenance = {manifest_.hyperparam_hash, manifest_.root_seed, s.index};
  return out;
}

void DatasetReader::verify_hash(const std::string& expected_hash) const {
  if (manifest_.hyperparam_hash != expected_hash) {
    throw HashMismatchError("dataset was generated with hash " + manifest_.hyperparam_hash +
                            ", expected " + expected_hash);
  }
}

}  // namespace flowforge
