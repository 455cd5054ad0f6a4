#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"

#include "bridge/adapter.hpp"
#include "bridge/reconstruct.hpp"
#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"
#include "dataio/checkpoint.hpp"
#include "dataio/csvio.hpp"
#include "dataio/manifest.hpp"
#include "dataio/synth.hpp"
#include "dataio/window_file.hpp"
#include "nn/tensor.hpp"
#include "signal/pipeline.hpp"
#include "support/oracles.hpp"

TEST_SUITE_BEGIN("dataio");

using namespace cogadapt;
using dataio::CheckpointMeta;
using dataio::Manifest;
using dataio::SynthConfig;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spew(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

signal::EcgWindow make_window(int channels, int samples, float fill_step) {
  signal::EcgWindow w;
  w.subject = "s01";
  w.fs = 256.0;
  w.t_start = 3.5;
  w.label = 1;
  w.data.channels = channels;
  w.data.samples = samples;
  w.data.data.resize(static_cast<std::size_t>(channels) * samples);
  for (std::size_t i = 0; i < w.data.data.size(); ++i) {
    // Values exactly representable in f32 so round trips compare with ==.
    w.data.data[i] = static_cast<double>(static_cast<float>(fill_step * static_cast<double>(i) - 2.0f));
  }
  return w;
}

double sample_std(const std::vector<double>& xs) {
  REQUIRE(xs.size() >= 2);
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double v : xs) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

TEST_CASE("window file round trips payload and rate; identity stays in the manifest") {
  oracle::TempDir td("cga-window");
  auto path = (td / "w0.bin").string();
  signal::EcgWindow w = make_window(3, 17, 0.125f);
  dataio::write_window(path, w);

  signal::EcgWindow r = dataio::read_window(path);
  CHECK(r.data.channels == 3);
  CHECK(r.data.samples == 17);
  CHECK(r.fs == doctest::Approx(256.0));
  REQUIRE(r.data.data.size() == w.data.data.size());
  for (std::size_t i = 0; i < w.data.data.size(); ++i) {
    CHECK(r.data.data[i] == w.data.data[i]);
  }
  // Subject, start time, and label are manifest business.
  CHECK(r.subject.empty());
  CHECK(r.t_start == 0.0);
  CHECK_FALSE(r.label.has_value());
}

TEST_CASE("window file writes are byte deterministic") {
  oracle::TempDir td("cga-window-det");
  auto a = (td / "a.bin").string();
  auto b = (td / "b.bin").string();
  signal::EcgWindow w = make_window(2, 9, 0.25f);
  dataio::write_window(a, w);
  signal::EcgWindow r = dataio::read_window(a);
  r.fs = w.fs;
  dataio::write_window(b, r);
  CHECK(hash_file(a) == hash_file(b));
}

TEST_CASE("window file values survive at f32 precision") {
  oracle::TempDir td("cga-window-f32");
  auto path = (td / "w.bin").string();
  signal::EcgWindow w = make_window(1, 5, 0.0f);
  w.data.data = {0.1, 1.0 / 3.0, -2.718281828459045, 1e-20, 12345.6789};
  dataio::write_window(path, w);
  signal::EcgWindow r = dataio::read_window(path);
  for (std::size_t i = 0; i < w.data.data.size(); ++i) {
    CHECK(r.data.data[i] == static_cast<double>(static_cast<float>(w.data.data[i])));
  }
}

TEST_CASE("window file failure modes are distinct") {
  oracle::TempDir td("cga-window-err");
  auto good = (td / "good.bin").string();
  dataio::write_window(good, make_window(2, 6, 0.5f));
  std::string bytes = slurp(good);
  REQUIRE(bytes.size() > 16);

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(dataio::read_window((td / "absent.bin").string()),
                         doctest::Contains("cannot open"), IoError);
  }
  SUBCASE("bad magic") {
    std::string b = bytes;
    b[0] = 'X';
    auto path = (td / "magic.bin").string();
    spew(path, b);
    CHECK_THROWS_WITH_AS(dataio::read_window(path), doctest::Contains("bad magic"), IoError);
  }
  SUBCASE("unknown version") {
    std::string b = bytes;
    b[4] = 2;  // version lives right after the magic, little-endian u16
    b[5] = 0;
    auto path = (td / "version.bin").string();
    spew(path, b);
    CHECK_THROWS_WITH_AS(dataio::read_window(path), doctest::Contains("unsupported version 2"),
                         IoError);
  }
  SUBCASE("truncated header") {
    auto path = (td / "shorthdr.bin").string();
    spew(path, bytes.substr(0, 10));
    CHECK_THROWS_WITH_AS(dataio::read_window(path), doctest::Contains("truncated header"), IoError);
  }
  SUBCASE("truncated payload") {
    auto path = (td / "shortpay.bin").string();
    spew(path, bytes.substr(0, bytes.size() - 7));
    CHECK_THROWS_WITH_AS(dataio::read_window(path), doctest::Contains("truncated payload"),
                         IoError);
  }
  SUBCASE("trailing bytes") {
    auto path = (td / "long.bin").string();
    spew(path, bytes + std::string("\0", 1));
    CHECK_THROWS_WITH_AS(dataio::read_window(path), doctest::Contains("trailing bytes"), IoError);
  }
}

TEST_CASE("checkpoint round trips leaves bitwise with metadata verbatim") {
  oracle::TempDir td("cga-ckpt");
  auto path = (td / "m.ckpt").string();

  nn::Vec a = {1.0 / 3.0, std::sqrt(2.0), -0.0, 5e-324};
  nn::Vec b = {2.718281828459045, -1e300};
  nn::Vec c = {0.1};
  dataio::LeafView leaves = {{"head.out.bias", &b}, {"adapter.l1.weight", &a}, {"enc.bn.gamma", &c}};
  CheckpointMeta meta;
  meta.scenario = "B";
  meta.epoch = 17;
  meta.val_metric = 0.8341764591;
  dataio::write_checkpoint(path, meta, leaves);

  nn::Vec ra(4, 0.0), rb(2, 0.0), rc(1, 0.0);
  dataio::LeafSlots slots = {{"adapter.l1.weight", &ra}, {"enc.bn.gamma", &rc}, {"head.out.bias", &rb}};
  CheckpointMeta got = dataio::read_checkpoint(path, slots);
  CHECK(got.scenario == "B");
  CHECK(got.epoch == 17);
  CHECK(got.val_metric == meta.val_metric);
  CHECK(ra == a);
  CHECK(rb == b);
  CHECK(rc == c);

  std::map<std::string, nn::Vec> raw;
  CheckpointMeta rawmeta = dataio::read_checkpoint_raw(path, raw);
  CHECK(rawmeta.epoch == 17);
  REQUIRE(raw.size() == 3);
  CHECK(raw.at("adapter.l1.weight") == a);
  CHECK(raw.at("head.out.bias") == b);
}

TEST_CASE("checkpoint bytes do not depend on leaf registration order") {
  oracle::TempDir td("cga-ckpt-order");
  nn::Vec a = {1.5, 2.5};
  nn::Vec b = {-0.25};
  CheckpointMeta meta;
  meta.scenario = "pretrain";
  meta.epoch = 3;
  meta.val_metric = 0.125;
  auto p1 = (td / "fwd.ckpt").string();
  auto p2 = (td / "rev.ckpt").string();
  dataio::write_checkpoint(p1, meta, {{"alpha", &a}, {"beta", &b}});
  dataio::write_checkpoint(p2, meta, {{"beta", &b}, {"alpha", &a}});
  CHECK(hash_file(p1) == hash_file(p2));
}

TEST_CASE("checkpoint restores a live adapter exactly") {
  oracle::TempDir td("cga-ckpt-adapter");
  auto path = (td / "adapter.ckpt").string();
  Rng rng(11);
  bridge::AdapterParams src = bridge::make_adapter(3, 6, 12, 0.1, rng);
  for (double& v : src.bn1.running_mean) v = 0.3 * rng.gaussian();
  for (double& v : src.bn2.running_var) v = 1.0 + 0.1 * rng.uniform();

  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  bridge::collect_adapter(src, "adapter", "adapter", params, buffers);
  CheckpointMeta meta;
  meta.scenario = "pretrain";
  meta.epoch = 9;
  meta.val_metric = 0.0123;
  dataio::write_checkpoint(path, meta, dataio::checkpoint_leaves(params, buffers));

  bridge::AdapterParams dst = bridge::make_adapter(3, 6, 12, 0.1, rng);  // different draw
  std::vector<nn::ParamRef> dparams;
  std::vector<nn::BufferRef> dbuffers;
  bridge::collect_adapter(dst, "adapter", "adapter", dparams, dbuffers);
  dataio::read_checkpoint(path, dataio::checkpoint_slots(dparams, dbuffers));

  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(*dparams[i].data == *params[i].data);
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    CHECK(*dbuffers[i].data == *buffers[i].data);
  }
}

TEST_CASE("checkpoint shape errors name the offending leaf") {
  oracle::TempDir td("cga-ckpt-shape");
  auto path = (td / "m.ckpt").string();
  nn::Vec a = {1.0, 2.0, 3.0};
  nn::Vec b = {4.0};
  CheckpointMeta meta;
  dataio::write_checkpoint(path, meta, {{"alpha", &a}, {"beta", &b}});

  SUBCASE("leaf count mismatch") {
    nn::Vec ra(3, 0.0);
    dataio::LeafSlots slots = {{"alpha", &ra}};
    CHECK_THROWS_WITH_AS(dataio::read_checkpoint(path, slots),
                         doctest::Contains("holds 2 leaves"), IoError);
  }
  SUBCASE("missing leaf") {
    nn::Vec ra(3, 0.0), rg(1, 0.0);
    dataio::LeafSlots slots = {{"alpha", &ra}, {"gamma", &rg}};
    CHECK_THROWS_WITH_AS(dataio::read_checkpoint(path, slots),
                         doctest::Contains("missing leaf gamma"), IoError);
  }
  SUBCASE("size mismatch") {
    nn::Vec ra(3, 0.0), rb(2, 0.0);
    dataio::LeafSlots slots = {{"alpha", &ra}, {"beta", &rb}};
    CHECK_THROWS_WITH_AS(dataio::read_checkpoint(path, slots),
                         doctest::Contains("shape mismatch for leaf beta"), IoError);
  }
}

TEST_CASE("checkpoint corruption modes are distinct") {
  oracle::TempDir td("cga-ckpt-err");
  auto good = (td / "good.ckpt").string();
  nn::Vec a = {1.0, 2.0};
  CheckpointMeta meta;
  meta.scenario = "A";
  dataio::write_checkpoint(good, meta, {{"alpha", &a}});
  std::string bytes = slurp(good);
  std::map<std::string, nn::Vec> raw;

  SUBCASE("bad magic") {
    std::string b = bytes;
    b[1] = 'Z';
    auto path = (td / "magic.ckpt").string();
    spew(path, b);
    CHECK_THROWS_WITH_AS(dataio::read_checkpoint_raw(path, raw), doctest::Contains("bad magic"),
                         IoError);
  }
  SUBCASE("unknown version") {
    std::string b = bytes;
    b[4] = 9;
    b[5] = 0;
    auto path = (td / "version.ckpt").string();
    spew(path, b);
    CHECK_THROWS_WITH_AS(dataio::read_checkpoint_raw(path, raw),
                         doctest::Contains("unsupported version 9"), IoError);
  }
  SUBCASE("truncation") {
    auto path = (td / "short.ckpt").string();
    spew(path, bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_WITH_AS(dataio::read_checkpoint_raw(path, raw), doctest::Contains("truncated"),
                         IoError);
  }
  SUBCASE("trailing bytes") {
    auto path = (td / "long.ckpt").string();
    spew(path, bytes + "xx");
    CHECK_THROWS_WITH_AS(dataio::read_checkpoint_raw(path, raw),
                         doctest::Contains("trailing bytes"), IoError);
  }
}

TEST_CASE("csv ingest reads a minimal file and infers the sampling rate") {
  oracle::TempDir td("cga-csv-min");
  auto path = (td / "rec01.csv").string();
  spew(path,
       "timestamp_s,I,II\n"
       "0,0.5,1\n"
       "0.004,0.25,-1\n"
       "0.008,0.125,0\n");
  signal::Recording rec = dataio::ingest_csv(path);
  CHECK(rec.subject == "rec01");  // file stem fallback
  CHECK(rec.fs == doctest::Approx(250.0));
  CHECK(rec.chest_reference == "RL");
  REQUIRE(rec.lead_names.size() == 2);
  CHECK(rec.lead_names[0] == "I");
  CHECK(rec.lead_names[1] == "II");
  REQUIRE(rec.n_samples() == 3);
  CHECK(rec.leads[0][1] == doctest::Approx(0.25));
  CHECK(rec.leads[1][2] == doctest::Approx(0.0));
  CHECK(rec.label_stream.empty());
}

TEST_CASE("csv ingest honors metadata comments") {
  oracle::TempDir td("cga-csv-meta");
  auto path = (td / "x.csv").string();
  spew(path,
       "# subject=s42\n"
       "# fs=125\n"
       "# chest_reference=WCT\n"
       "# label_period=5\n"
       "timestamp_s,I,II,V2\n"
       "0,0.1,0.2,0.3\n"
       "0.008,0.1,0.2,0.3\n");
  signal::Recording rec = dataio::ingest_csv(path);
  CHECK(rec.subject == "s42");
  CHECK(rec.fs == doctest::Approx(125.0));  // comment wins over the 0.008 deltas
  CHECK(rec.chest_reference == "WCT");
  CHECK(rec.label_period == doctest::Approx(5.0));
}

TEST_CASE("csv ingest maps sparse labels to intervals and flags conflicts") {
  oracle::TempDir td("cga-csv-label");
  auto header = std::string("# fs=10\n# label_period=1\ntimestamp_s,I,label\n");

  SUBCASE("sparse labels land on their interval") {
    auto path = (td / "ok.csv").string();
    std::string body;
    for (int i = 0; i < 30; ++i) {
      body += std::to_string(i * 0.1) + ",0.5,";
      if (i == 3) body += "2";       // interval 0
      if (i == 17) body += "7";      // interval 1
      body += "\n";
    }
    spew(path, header + body);
    signal::Recording rec = dataio::ingest_csv(path);
    REQUIRE(rec.label_stream.size() == 2);
    CHECK(rec.label_stream[0].first == 0);
    CHECK(rec.label_stream[0].second == 2);
    CHECK(rec.label_stream[1].first == 1);
    CHECK(rec.label_stream[1].second == 7);
  }
  SUBCASE("duplicate equal labels in one interval collapse") {
    auto path = (td / "dup.csv").string();
    spew(path, header + "0,0.5,3\n0.1,0.5,3\n0.2,0.5,\n");
    signal::Recording rec = dataio::ingest_csv(path);
    REQUIRE(rec.label_stream.size() == 1);
    CHECK(rec.label_stream[0].second == 3);
  }
  SUBCASE("conflicting labels in one interval are an error") {
    auto path = (td / "conflict.csv").string();
    spew(path, header + "0,0.5,3\n0.1,0.5,8\n0.2,0.5,\n");
    CHECK_THROWS_WITH_AS(dataio::ingest_csv(path), doctest::Contains("conflicting label"),
                         IoError);
  }
  SUBCASE("labels outside 1..9 are an error") {
    auto path = (td / "range.csv").string();
    spew(path, header + "0,0.5,0\n0.1,0.5,\n");
    CHECK_THROWS_WITH_AS(dataio::ingest_csv(path), doctest::Contains("1..9"), IoError);
  }
}

TEST_CASE("csv ingest treats empty lead cells as gaps") {
  oracle::TempDir td("cga-csv-nan");
  auto path = (td / "gap.csv").string();
  spew(path,
       "# fs=100\n"
       "timestamp_s,I,II\n"
       "0,0.5,1\n"
       "0.01,,1\n"
       "0.02,0.5,1\n");
  signal::Recording rec = dataio::ingest_csv(path);
  CHECK_FALSE(std::isnan(rec.leads[0][0]));
  CHECK(std::isnan(rec.leads[0][1]));
  CHECK_FALSE(std::isnan(rec.leads[0][2]));
  CHECK_FALSE(std::isnan(rec.leads[1][1]));
}

TEST_CASE("csv ingest errors carry the physical row number") {
  oracle::TempDir td("cga-csv-err");

  SUBCASE("cell count mismatch") {
    auto path = (td / "cells.csv").string();
    spew(path,
         "timestamp_s,I\n"
         "0,0.5\n"
         "0.01,0.5,9,9\n");
    CHECK_THROWS_WITH_AS(dataio::ingest_csv(path), doctest::Contains("row 3 has 4 cells"),
                         IoError);
  }
  SUBCASE("non-numeric lead cell names row and column") {
    auto path = (td / "parse.csv").string();
    std::string body = "timestamp_s,I,II\n";
    for (int i = 0; i < 16; ++i) {
      // Physical line = header + i + 1; the bad cell sits on line 17.
      body += std::to_string(i * 0.01) + ",0.5," + (i == 15 ? "oops" : "1") + "\n";
    }
    spew(path, body);
    CHECK_THROWS_AS(dataio::ingest_csv(path), IoError);
    try {
      dataio::ingest_csv(path);
    } catch (const IoError& e) {
      std::string msg = e.what();
      CHECK(msg.find("row 17") != std::string::npos);
      CHECK(msg.find("II") != std::string::npos);
    }
  }
  SUBCASE("no data rows") {
    auto path = (td / "empty.csv").string();
    spew(path, "timestamp_s,I\n");
    CHECK_THROWS_WITH_AS(dataio::ingest_csv(path), doctest::Contains("no data rows"), IoError);
  }
  SUBCASE("single row cannot infer fs") {
    auto path = (td / "onerow.csv").string();
    spew(path, "timestamp_s,I\n0,0.5\n");
    CHECK_THROWS_WITH_AS(dataio::ingest_csv(path), doctest::Contains("sampling rate"), IoError);
  }
  SUBCASE("wrong first column") {
    auto path = (td / "badhdr.csv").string();
    spew(path, "time,I\n0,0.5\n");
    CHECK_THROWS_WITH_AS(dataio::ingest_csv(path), doctest::Contains("timestamp_s"), IoError);
  }
  SUBCASE("no lead columns") {
    auto path = (td / "noleads.csv").string();
    spew(path, "timestamp_s,label\n0,1\n");
    CHECK_THROWS_WITH_AS(dataio::ingest_csv(path), doctest::Contains("no lead columns"), IoError);
  }
}

TEST_CASE("csv emit then ingest round trips a recording") {
  oracle::TempDir td("cga-csv-rt");
  auto path = (td / "round.csv").string();

  signal::Recording rec;
  rec.subject = "s07";
  rec.fs = 200.0;
  rec.label_period = 2.0;
  rec.chest_reference = "RL";
  rec.lead_names = {"I", "II", "V2"};
  std::size_t n = 800;  // 4 seconds
  Rng rng(5);
  rec.timestamps.resize(n);
  rec.leads.assign(3, nn::Vec(n));
  for (std::size_t i = 0; i < n; ++i) {
    rec.timestamps[i] = static_cast<double>(i) / rec.fs;
    for (auto& lead : rec.leads) lead[i] = rng.gaussian();
  }
  rec.leads[1][100] = std::numeric_limits<double>::quiet_NaN();
  rec.label_stream = {{0, 2}, {1, 7}, {3, 4}};
  rec.validate();

  dataio::emit_csv(rec, path);
  signal::Recording back = dataio::ingest_csv(path);

  CHECK(back.subject == "s07");
  CHECK(back.fs == doctest::Approx(200.0));
  CHECK(back.label_period == doctest::Approx(2.0));
  CHECK(back.chest_reference == "RL");
  CHECK(back.lead_names == rec.lead_names);
  REQUIRE(back.n_samples() == n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(back.timestamps[i] == doctest::Approx(rec.timestamps[i]).epsilon(1e-12));
    for (std::size_t l = 0; l < 3; ++l) {
      if (l == 1 && i == 100) continue;
      // Leads are serialized at f32 precision.
      CHECK(back.leads[l][i] == static_cast<double>(static_cast<float>(rec.leads[l][i])));
    }
  }
  CHECK(std::isnan(back.leads[1][100]));
  CHECK(back.label_stream == rec.label_stream);
}

TEST_CASE("manifest round trips and validates structure") {
  oracle::TempDir td("cga-manifest");
  auto path = (td / "manifest.json").string();

  Manifest m;
  m.dataset = "toy";
  m.subjects = {"s01", "s02"};
  m.recordings = {{"recordings/s01.csv", "s01"}, {"recordings/s02.csv", "s02"}};
  dataio::ManifestWindow w0{"windows/w000.bin", "s01", 0.0, 1, "train"};
  dataio::ManifestWindow w1{"windows/w001.bin", "s02", 2.5, std::nullopt, "eval"};
  dataio::ManifestWindow w2{"windows/w002.bin", "s02", 5.0, 0, "target_train"};
  m.windows = {w0, w1, w2};
  m.validate();

  dataio::write_manifest(m, path);
  Manifest r = dataio::read_manifest(path);
  CHECK(r.format_version == 1);
  CHECK(r.dataset == "toy");
  CHECK(r.subjects == m.subjects);
  REQUIRE(r.recordings.size() == 2);
  CHECK(r.recordings[1].file == "recordings/s02.csv");
  CHECK(r.recordings[1].subject == "s02");
  REQUIRE(r.windows.size() == 3);
  CHECK(r.windows[0].label == 1);
  CHECK_FALSE(r.windows[1].label.has_value());
  CHECK(r.windows[1].t_start == doctest::Approx(2.5));
  CHECK(r.windows[2].split == "target_train");

  auto p2 = (td / "again.json").string();
  dataio::write_manifest(m, p2);
  CHECK(hash_file(path) == hash_file(p2));
}

TEST_CASE("manifest validation rejects broken references") {
  Manifest m;
  m.dataset = "toy";
  m.subjects = {"s01"};
  m.recordings = {{"r.csv", "s01"}};
  m.windows = {{"w.bin", "s01", 0.0, 1, "train"}};
  m.validate();

  SUBCASE("unlisted subject") {
    Manifest bad = m;
    bad.windows[0].subject = "s99";
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("unlisted subject s99"), IoError);
  }
  SUBCASE("non-binary label") {
    Manifest bad = m;
    bad.windows[0].label = 2;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("non-binary label"), IoError);
  }
  SUBCASE("empty split tag") {
    Manifest bad = m;
    bad.windows[0].split = "";
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("empty split"), IoError);
  }
  SUBCASE("empty dataset name") {
    Manifest bad = m;
    bad.dataset.clear();
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("dataset name"), IoError);
  }
  SUBCASE("bad format version") {
    Manifest bad = m;
    bad.format_version = 7;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("format_version"), IoError);
  }
}

TEST_CASE("verify_manifest_files checks existence and parse of every reference") {
  oracle::TempDir td("cga-manifest-files");
  std::filesystem::create_directories(td / "recordings");
  std::filesystem::create_directories(td / "windows");

  signal::Recording rec;
  rec.subject = "s01";
  rec.fs = 100.0;
  rec.lead_names = {"I"};
  rec.timestamps = {0.0, 0.01, 0.02};
  rec.leads = {{0.1, 0.2, 0.3}};
  rec.validate();
  dataio::emit_csv(rec, (td / "recordings/s01.csv").string());
  dataio::write_window((td / "windows/w0.bin").string(), make_window(1, 4, 0.5f));

  Manifest m;
  m.dataset = "toy";
  m.subjects = {"s01"};
  m.recordings = {{"recordings/s01.csv", "s01"}};
  m.windows = {{"windows/w0.bin", "s01", 0.0, 1, "train"}};
  dataio::verify_manifest_files(m, td.str());

  SUBCASE("missing window file") {
    std::filesystem::remove(td / "windows/w0.bin");
    CHECK_THROWS_WITH_AS(dataio::verify_manifest_files(m, td.str()),
                         doctest::Contains("missing window file"), IoError);
  }
  SUBCASE("missing recording file") {
    std::filesystem::remove(td / "recordings/s01.csv");
    CHECK_THROWS_WITH_AS(dataio::verify_manifest_files(m, td.str()),
                         doctest::Contains("missing recording file"), IoError);
  }
}

TEST_CASE("synth subjects are deterministic and independent of cohort size") {
  SynthConfig small;
  small.n_subjects = 5;
  small.minutes_per_subject = 0.2;
  small.fs = 128.0;
  small.seed = 9;
  SynthConfig large = small;
  large.n_subjects = 20;

  dataio::SubjectSynth a = dataio::synth_subject(small, 2);
  dataio::SubjectSynth b = dataio::synth_subject(large, 2);
  dataio::SubjectSynth c = dataio::synth_subject(small, 2);

  CHECK(a.truth.subject == "s03");
  CHECK(a.truth.hr_bpm == b.truth.hr_bpm);
  CHECK(a.truth.beat_times == b.truth.beat_times);
  CHECK(a.truth.block_state == b.truth.block_state);
  for (int l = 0; l < 12; ++l) {
    CHECK(a.twelve.leads[static_cast<std::size_t>(l)] == b.twelve.leads[static_cast<std::size_t>(l)]);
    CHECK(a.twelve.leads[static_cast<std::size_t>(l)] == c.twelve.leads[static_cast<std::size_t>(l)]);
  }
  CHECK(a.wearable.leads == c.wearable.leads);

  dataio::SubjectSynth other = dataio::synth_subject(small, 3);
  CHECK(other.twelve.leads[0] != a.twelve.leads[0]);
}

TEST_CASE("synth limb leads satisfy the lead identities even with noise") {
  SynthConfig cfg;
  cfg.n_subjects = 1;
  cfg.minutes_per_subject = 0.1;
  cfg.fs = 128.0;
  cfg.noise_std = 0.05;
  dataio::SubjectSynth s = dataio::synth_subject(cfg, 0);
  const auto& L = s.twelve.leads;
  REQUIRE(L.size() == 12);
  std::size_t n = L[0].size();
  REQUIRE(n == 768);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(L[2][i] == L[1][i] - L[0][i]);
    CHECK(L[3][i] == -(L[0][i] + L[1][i]) / 2.0);
    CHECK(L[4][i] == L[0][i] - L[1][i] / 2.0);
    CHECK(L[5][i] == L[1][i] - L[0][i] / 2.0);
  }
}

TEST_CASE("synth wearable view is the re-referenced chest pick") {
  SynthConfig cfg;
  cfg.n_subjects = 1;
  cfg.minutes_per_subject = 0.1;
  cfg.fs = 128.0;
  cfg.chest_pick = "V3";
  dataio::SubjectSynth s = dataio::synth_subject(cfg, 0);

  CHECK(s.wearable.lead_names == std::vector<std::string>{"I", "II", "V3"});
  CHECK(s.wearable.chest_reference == "RL");
  CHECK(s.twelve.chest_reference == "WCT");
  REQUIRE(s.wearable.leads.size() == 3);
  CHECK(s.wearable.leads[0] == s.twelve.leads[0]);
  CHECK(s.wearable.leads[1] == s.twelve.leads[1]);
  std::size_t n = s.twelve.leads[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    double rl = s.twelve.leads[8][i] - (s.twelve.leads[0][i] + s.twelve.leads[1][i]) / 3.0;
    CHECK(s.wearable.leads[2][i] == rl);
  }
  CHECK(s.wearable.timestamps.size() == n);
  CHECK(s.twelve.label_stream == s.wearable.label_stream);
}

TEST_CASE("synth labels alternate load states per interval") {
  SynthConfig cfg;
  cfg.n_subjects = 2;
  cfg.minutes_per_subject = 0.35;  // 21 s, so the last interval is partial
  cfg.fs = 128.0;
  cfg.label_period_s = 10.0;

  dataio::SubjectSynth s0 = dataio::synth_subject(cfg, 0);
  dataio::SubjectSynth s1 = dataio::synth_subject(cfg, 1);

  REQUIRE(s0.truth.block_state.size() == 3);
  CHECK(s0.truth.block_state == std::vector<int>{0, 1, 0});
  CHECK(s1.truth.block_state == std::vector<int>{1, 0, 1});

  REQUIRE(s0.twelve.label_stream.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(s0.twelve.label_stream[j].first == static_cast<long long>(j));
    int raw = s0.twelve.label_stream[j].second;
    CHECK(signal::binarize_label(raw) == s0.truth.block_state[j]);
  }
}

TEST_CASE("synth without noise is exactly linear from wearable to twelve leads") {
  SynthConfig cfg;
  cfg.n_subjects = 1;
  cfg.minutes_per_subject = 0.1;
  cfg.fs = 128.0;
  cfg.noise_std = 0.0;
  dataio::SubjectSynth s = dataio::synth_subject(cfg, 0);

  std::size_t n = s.wearable.leads[0].size();
  nn::Tensor2 x;
  x.channels = 3;
  x.samples = static_cast<int>(n);
  x.data.reserve(3 * n);
  for (const auto& lead : s.wearable.leads) x.data.insert(x.data.end(), lead.begin(), lead.end());
  nn::Tensor2 y;
  y.channels = 12;
  y.samples = static_cast<int>(n);
  y.data.reserve(12 * n);
  for (const auto& lead : s.twelve.leads) y.data.insert(y.data.end(), lead.begin(), lead.end());

  bridge::FixedLeadTransform fit = bridge::least_squares_fit({x}, {y});
  nn::Tensor2 pred = bridge::apply_fixed_transform(fit, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    double d = pred.data[i] - y.data[i];
    acc += d * d;
  }
  double rmse = std::sqrt(acc / static_cast<double>(pred.data.size()));
  CHECK(rmse < 1e-6);
}

TEST_CASE("synth RR variability separates the two load states") {
  SynthConfig cfg;
  cfg.n_subjects = 3;
  cfg.minutes_per_subject = 3.0;
  cfg.fs = 128.0;
  cfg.base_hr_bpm = 90.0;
  cfg.rr_std_low_ms = 100.0;
  cfg.rr_std_high_ms = 15.0;
  cfg.seed = 4;

  std::vector<double> centroid_acc(2, 0.0);
  std::vector<int> centroid_n(2, 0);
  std::vector<std::pair<double, int>> interval_stats;  // (rr std, true state)

  for (int subj = 0; subj < cfg.n_subjects; ++subj) {
    dataio::SubjectSynth s = dataio::synth_subject(cfg, subj);
    std::size_t blocks = s.truth.block_state.size();
    REQUIRE(blocks == 18);
    std::vector<std::vector<double>> per_block(blocks);
    for (std::size_t k = 0; k < s.truth.beat_times.size(); ++k) {
      auto j = static_cast<std::size_t>(s.truth.beat_times[k] / cfg.label_period_s);
      if (j >= blocks) j = blocks - 1;
      per_block[j].push_back(s.truth.rr_intervals[k]);
    }
    for (std::size_t j = 0; j < blocks; ++j) {
      REQUIRE(per_block[j].size() >= 4);
      double sd = sample_std(per_block[j]);
      int state = s.truth.block_state[j];
      interval_stats.emplace_back(sd, state);
      centroid_acc[static_cast<std::size_t>(state)] += sd;
      centroid_n[static_cast<std::size_t>(state)] += 1;
    }
  }
  REQUIRE(centroid_n[0] > 0);
  REQUIRE(centroid_n[1] > 0);
  double c0 = centroid_acc[0] / centroid_n[0];
  double c1 = centroid_acc[1] / centroid_n[1];
  CHECK(c0 > 2.0 * c1);  // calm state was configured with the wider RR spread

  int correct = 0;
  for (const auto& [sd, state] : interval_stats) {
    int guess = std::abs(sd - c0) <= std::abs(sd - c1) ? 0 : 1;
    if (guess == state) ++correct;
  }
  double accuracy = static_cast<double>(correct) / static_cast<double>(interval_stats.size());
  CHECK(accuracy >= 0.9);
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  cfg.n_subjects = 1;
  cfg.minutes_per_subject = 0.05;
  cfg.validate();

  SUBCASE("identical RR spreads carry no label signal") {
    SynthConfig bad = cfg;
    bad.rr_std_low_ms = 20.0;
    bad.rr_std_high_ms = 20.0;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("distinct RR std"), ConfigError);
  }
  SUBCASE("chest pick must be a precordial lead") {
    SynthConfig bad = cfg;
    bad.chest_pick = "I";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
  SUBCASE("mixing must have 36 entries") {
    SynthConfig bad = cfg;
    bad.mixing.assign(35, 0.5);
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("36"), ConfigError);
  }
  SUBCASE("derived limb rows must follow rows I and II") {
    SynthConfig bad = cfg;
    bad.mixing = dataio::default_mixing();
    bad.mixing[2 * 3 + 0] += 0.25;  // break row III
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("III"), ConfigError);
  }
  SUBCASE("rank-deficient mixing is rejected") {
    SynthConfig bad = cfg;
    bad.mixing = dataio::default_mixing();
    for (int r = 0; r < 12; ++r) bad.mixing[static_cast<std::size_t>(r) * 3 + 2] = 0.0;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("rank-deficient"), ConfigError);
  }
  SUBCASE("hr bounds") {
    SynthConfig bad = cfg;
    bad.base_hr_bpm = 300.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
}

TEST_CASE("synth_generate produces the whole cohort in subject order") {
  SynthConfig cfg;
  cfg.n_subjects = 2;
  cfg.minutes_per_subject = 0.1;
  cfg.fs = 128.0;
  dataio::SynthDataset ds = dataio::synth_generate(cfg);
  REQUIRE(ds.twelve.size() == 2);
  REQUIRE(ds.wearable.size() == 2);
  REQUIRE(ds.truth.size() == 2);
  CHECK(ds.twelve[0].subject == "s01");
  CHECK(ds.twelve[1].subject == "s02");
  CHECK(ds.wearable[1].subject == "s02");
  CHECK(ds.mixing == dataio::default_mixing());

  dataio::SubjectSynth lone = dataio::synth_subject(cfg, 1);
  CHECK(ds.twelve[1].leads[5] == lone.twelve.leads[5]);
}

TEST_SUITE_END();
