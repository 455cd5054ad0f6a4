#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cogadapt::dataio {

// One dataset = one manifest document (JSON, UTF-8). Paths inside it are
// relative to the manifest's own directory so the dataset moves as a unit.

struct ManifestRecording {
  std::string file;
  std::string subject;
};

struct ManifestWindow {
  std::string file;
  std::string subject;
  double t_start = 0.0;
  std::optional<int> label;  // binary; absent for unlabeled intervals
  // Stride family, not a subject partition: "train" windows come from the
  // dense overlapping stride, "eval" from the non-overlapping one. Which
  // subjects land in which fold is decided later by the split protocol.
  std::string split;
};

struct Manifest {
  int format_version = 1;
  std::string dataset;
  std::vector<std::string> subjects;
  std::vector<ManifestRecording> recordings;
  std::vector<ManifestWindow> windows;

  // Structural checks only: version, non-empty names, every referenced
  // subject listed, labels binary. File existence is checked separately.
  void validate() const;
};

Manifest read_manifest(const std::string& path);
void write_manifest(const Manifest& m, const std::string& path);

// Deep invariant: every referenced file exists and parses (CSV recordings,
// binary window files). base_dir is the manifest's directory.
void verify_manifest_files(const Manifest& m, const std::string& base_dir);

}  // namespace cogadapt::dataio
