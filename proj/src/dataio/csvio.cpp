#include "dataio/csvio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "common/error.hpp"
#include "common/text.hpp"

namespace cogadapt::dataio {

namespace {

std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return stem;
}

double infer_fs(const signal::Vec& ts) {
  std::vector<double> deltas;
  deltas.reserve(ts.size());
  for (std::size_t i = 1; i < ts.size(); ++i) {
    double d = ts[i] - ts[i - 1];
    if (d > 0.0) deltas.push_back(d);
  }
  if (deltas.empty()) throw IoError("ingest_csv: cannot infer sampling rate from one row");
  // Median period is robust against gaps.
  std::nth_element(deltas.begin(), deltas.begin() + deltas.size() / 2, deltas.end());
  return 1.0 / deltas[deltas.size() / 2];
}

}  // namespace

signal::Recording ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("ingest_csv: cannot open " + path);

  signal::Recording rec;
  rec.subject = file_stem(path);
  rec.chest_reference = "RL";
  double fs_comment = 0.0;

  std::string line;
  int line_no = 0;
  // Metadata comments, then the header row.
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string body = trim(t.substr(1));
      auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = trim(body.substr(0, eq));
      std::string value = trim(body.substr(eq + 1));
      std::string where = path + " line " + std::to_string(line_no);
      if (key == "subject") {
        rec.subject = value;
      } else if (key == "fs") {
        fs_comment = parse_double(value, where);
      } else if (key == "chest_reference") {
        rec.chest_reference = value;
      } else if (key == "label_period") {
        rec.label_period = parse_double(value, where);
      }
      continue;
    }
    header = split_csv_line(t);
    break;
  }
  if (header.empty()) throw IoError("ingest_csv: " + path + " has no header row");
  if (trim(header[0]) != "timestamp_s") {
    throw IoError("ingest_csv: " + path + " first column must be timestamp_s");
  }
  bool has_label = trim(header.back()) == "label";
  std::size_t n_leads = header.size() - 1 - (has_label ? 1 : 0);
  if (n_leads < 1) {
    throw IoError("ingest_csv: " + path + " has no lead columns");
  }
  for (std::size_t c = 0; c < n_leads; ++c) {
    rec.lead_names.push_back(trim(header[1 + c]));
  }
  rec.leads.assign(n_leads, {});

  std::vector<std::pair<long long, int>> raw_labels;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cells = split_csv_line(t);
    if (cells.size() != header.size()) {
      throw IoError("ingest_csv: " + path + " row " + std::to_string(line_no) +
                    " has " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(header.size()));
    }
    std::string where = path + " row " + std::to_string(line_no);
    double ts = parse_double(trim(cells[0]), where + ", column timestamp_s");
    rec.timestamps.push_back(ts);
    for (std::size_t c = 0; c < n_leads; ++c) {
      std::string cell = trim(cells[1 + c]);
      double v = cell.empty()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : parse_double(cell, where + ", column " + rec.lead_names[c]);
      rec.leads[c].push_back(v);
    }
    if (has_label) {
      std::string cell = trim(cells.back());
      if (!cell.empty()) {
        long long raw = parse_int(cell, where + ", column label");
        if (raw < 1 || raw > 9) {
          throw IoError(where + ": label must lie in 1..9, got " + cell);
        }
        long long k = static_cast<long long>(
            std::floor((ts - rec.timestamps.front()) / rec.label_period + 1e-9));
        if (!raw_labels.empty() && raw_labels.back().first == k) {
          if (raw_labels.back().second != static_cast<int>(raw)) {
            throw IoError(where + ": conflicting label for interval " +
                          std::to_string(k));
          }
        } else {
          raw_labels.emplace_back(k, static_cast<int>(raw));
        }
      }
    }
  }
  if (rec.timestamps.empty()) {
    throw IoError("ingest_csv: " + path + " has no data rows");
  }
  rec.label_stream = std::move(raw_labels);
  rec.fs = fs_comment > 0.0 ? fs_comment : infer_fs(rec.timestamps);
  rec.validate();
  return rec;
}

void emit_csv(const signal::Recording& rec, const std::string& path) {
  rec.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("emit_csv: cannot open " + path);
  out << "# subject=" << rec.subject << "\n";
  out << "# fs=" << format_f64(rec.fs) << "\n";
  if (!rec.chest_reference.empty()) {
    out << "# chest_reference=" << rec.chest_reference << "\n";
  }
  out << "# label_period=" << format_f64(rec.label_period) << "\n";
  out << "timestamp_s";
  for (const auto& n : rec.lead_names) out << "," << n;
  bool has_label = !rec.label_stream.empty();
  if (has_label) out << ",label";
  out << "\n";

  std::size_t next_label = 0;
  double t0 = rec.t0();
  for (std::size_t i = 0; i < rec.timestamps.size(); ++i) {
    out << format_f64(rec.timestamps[i]);
    for (const auto& lead : rec.leads) {
      double v = lead[i];
      out << ",";
      if (!std::isnan(v)) out << format_f32(static_cast<float>(v));
    }
    if (has_label) {
      out << ",";
      if (next_label < rec.label_stream.size()) {
        long long k = static_cast<long long>(
            std::floor((rec.timestamps[i] - t0) / rec.label_period + 1e-9));
        if (k >= rec.label_stream[next_label].first) {
          out << rec.label_stream[next_label].second;
          ++next_label;
        }
      }
    }
    out << "\n";
  }
  if (!out) throw IoError("emit_csv: write failed for " + path);
}

}  // namespace cogadapt::dataio
