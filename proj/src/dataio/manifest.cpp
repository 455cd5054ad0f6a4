#include "dataio/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "common/error.hpp"
#include "dataio/csvio.hpp"
#include "dataio/window_file.hpp"

namespace cogadapt::dataio {

namespace {

constexpr int kManifestVersion = 1;

using nlohmann::json;

}  // namespace

void Manifest::validate() const {
  if (format_version != kManifestVersion) {
    throw IoError("manifest: unsupported format_version " +
                  std::to_string(format_version));
  }
  if (dataset.empty()) throw IoError("manifest: dataset name is empty");
  for (const auto& s : subjects) {
    if (s.empty()) throw IoError("manifest: empty subject id");
  }
  auto known = [&](const std::string& s) {
    return std::find(subjects.begin(), subjects.end(), s) != subjects.end();
  };
  for (const auto& r : recordings) {
    if (r.file.empty()) throw IoError("manifest: recording with empty file path");
    if (!known(r.subject)) {
      throw IoError("manifest: recording " + r.file + " references unlisted subject " +
                    r.subject);
    }
  }
  for (const auto& w : windows) {
    if (w.file.empty()) throw IoError("manifest: window with empty file path");
    if (!known(w.subject)) {
      throw IoError("manifest: window " + w.file + " references unlisted subject " +
                    w.subject);
    }
    if (w.label && *w.label != 0 && *w.label != 1) {
      throw IoError("manifest: window " + w.file + " has non-binary label " +
                    std::to_string(*w.label));
    }
    if (w.split.empty()) {
      throw IoError("manifest: window " + w.file + " has empty split tag");
    }
  }
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_manifest: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("read_manifest: " + path + ": " + e.what());
  }
  Manifest m;
  try {
    m.format_version = doc.at("format_version").get<int>();
    m.dataset = doc.at("dataset").get<std::string>();
    m.subjects = doc.at("subjects").get<std::vector<std::string>>();
    for (const auto& jr : doc.value("recordings", json::array())) {
      ManifestRecording r;
      r.file = jr.at("file").get<std::string>();
      r.subject = jr.at("subject").get<std::string>();
      m.recordings.push_back(std::move(r));
    }
    for (const auto& jw : doc.value("windows", json::array())) {
      ManifestWindow w;
      w.file = jw.at("file").get<std::string>();
      w.subject = jw.at("subject").get<std::string>();
      w.t_start = jw.at("t_start").get<double>();
      if (jw.contains("label") && !jw.at("label").is_null()) {
        w.label = jw.at("label").get<int>();
      }
      w.split = jw.at("split").get<std::string>();
      m.windows.push_back(std::move(w));
    }
  } catch (const json::exception& e) {
    throw IoError("read_manifest: " + path + ": " + e.what());
  }
  m.validate();
  return m;
}

void write_manifest(const Manifest& m, const std::string& path) {
  m.validate();
  json doc;
  doc["format_version"] = m.format_version;
  doc["dataset"] = m.dataset;
  doc["subjects"] = m.subjects;
  json jrecs = json::array();
  for (const auto& r : m.recordings) {
    jrecs.push_back({{"file", r.file}, {"subject", r.subject}});
  }
  doc["recordings"] = std::move(jrecs);
  json jwins = json::array();
  for (const auto& w : m.windows) {
    json jw{{"file", w.file}, {"subject", w.subject}, {"t_start", w.t_start},
            {"split", w.split}};
    if (w.label) jw["label"] = *w.label;
    jwins.push_back(std::move(jw));
  }
  doc["windows"] = std::move(jwins);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_manifest: cannot open " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write_manifest: write failed for " + path);
}

void verify_manifest_files(const Manifest& m, const std::string& base_dir) {
  m.validate();
  namespace fs = std::filesystem;
  for (const auto& r : m.recordings) {
    fs::path p = fs::path(base_dir) / r.file;
    if (!fs::exists(p)) {
      throw IoError("manifest: missing recording file " + p.string());
    }
    ingest_csv(p.string());
  }
  for (const auto& w : m.windows) {
    fs::path p = fs::path(base_dir) / w.file;
    if (!fs::exists(p)) {
      throw IoError("manifest: missing window file " + p.string());
    }
    read_window(p.string());
  }
}

}  // namespace cogadapt::dataio
