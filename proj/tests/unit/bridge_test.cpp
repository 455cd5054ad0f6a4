#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "bridge/adapter.hpp"
#include "bridge/pretrain.hpp"
#include "bridge/reconstruct.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "support/oracles.hpp"

using namespace cogadapt;
using bridge::AdapterParams;
using bridge::FixedLeadTransform;
using nn::Batch;
using nn::Tensor2;
using nn::Vec;

namespace {

Tensor2 random_tensor(int c, int s, Rng& rng) {
  Tensor2 t(c, s);
  for (double& v : t.data) v = rng.gaussian();
  return t;
}

// Makes both batchnorm stages exact identities in eval mode.
void neutralize_bn(nn::BatchNormState& bn) {
  for (double& g : bn.gamma) g = std::sqrt(1.0 + bn.eps);
  std::fill(bn.beta.begin(), bn.beta.end(), 0.0);
  std::fill(bn.running_mean.begin(), bn.running_mean.end(), 0.0);
  std::fill(bn.running_var.begin(), bn.running_var.end(), 1.0);
}

std::vector<double*> learnable_leaves(AdapterParams& p) {
  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  bridge::collect_adapter(p, "a", "a", params, buffers);
  std::vector<double*> out;
  for (auto& pr : params) {
    for (double& v : *pr.data) out.push_back(&v);
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("bridge");

TEST_CASE("adapter: zero output map yields zero for any input") {
  Rng rng(1);
  AdapterParams p = bridge::make_adapter(3, 8, 12, 0.0, rng);
  std::fill(p.l3.weight.begin(), p.l3.weight.end(), 0.0);
  std::fill(p.l3.bias.begin(), p.l3.bias.end(), 0.0);
  Batch x{random_tensor(3, 20, rng)};
  Batch y = bridge::adapter_forward_eval(p, x);
  for (double v : y[0].data) CHECK(v == 0.0);
}

TEST_CASE("adapter: explicit weights realize an arbitrary linear map") {
  // relu(x) - relu(-x) == x, so W1 = [I; -I], W2 = I, W3 = [M, -M]
  // turns the whole stack into y = M x once the norms are neutral.
  Rng rng(2);
  AdapterParams p = bridge::make_adapter(3, 6, 12, 0.0, rng);
  std::fill(p.l1.weight.begin(), p.l1.weight.end(), 0.0);
  std::fill(p.l1.bias.begin(), p.l1.bias.end(), 0.0);
  std::fill(p.l2.weight.begin(), p.l2.weight.end(), 0.0);
  std::fill(p.l2.bias.begin(), p.l2.bias.end(), 0.0);
  std::fill(p.l3.weight.begin(), p.l3.weight.end(), 0.0);
  std::fill(p.l3.bias.begin(), p.l3.bias.end(), 0.0);
  neutralize_bn(p.bn1);
  neutralize_bn(p.bn2);

  double m[12][3];
  for (auto& row : m) {
    for (double& v : row) v = rng.gaussian();
  }
  for (int i = 0; i < 3; ++i) {
    p.l1.w(i, i) = 1.0;
    p.l1.w(i + 3, i) = -1.0;
  }
  for (int h = 0; h < 6; ++h) p.l2.w(h, h) = 1.0;
  for (int o = 0; o < 12; ++o) {
    for (int i = 0; i < 3; ++i) {
      p.l3.w(o, i) = m[o][i];
      p.l3.w(o, i + 3) = -m[o][i];
    }
  }

  Batch x{random_tensor(3, 40, rng)};
  Batch y = bridge::adapter_forward_eval(p, x);
  for (int o = 0; o < 12; ++o) {
    for (int t = 0; t < 40; ++t) {
      double want = 0.0;
      for (int i = 0; i < 3; ++i) want += m[o][i] * x[0].at(i, t);
      CHECK(std::abs(y[0].at(o, t) - want) < 1e-5);
    }
  }
}

TEST_CASE("adapter: eval forward is bitwise deterministic") {
  Rng rng(3);
  AdapterParams p = bridge::make_adapter(3, 16, 12, 0.3, rng);
  Batch x{random_tensor(3, 25, rng), random_tensor(3, 25, rng)};
  Batch a = bridge::adapter_forward_eval(p, x);
  Batch b = bridge::adapter_forward_eval(p, x);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
}

TEST_CASE("adapter: construction and input validation") {
  Rng rng(4);
  CHECK_THROWS_AS(bridge::make_adapter(0, 8, 12, 0.1, rng), ConfigError);
  CHECK_THROWS_AS(bridge::make_adapter(3, 8, 12, 1.0, rng), ConfigError);
  AdapterParams p = bridge::make_adapter(3, 8, 12, 0.1, rng);
  Batch wrong{random_tensor(4, 10, rng)};
  Rng unused(0);
  CHECK_THROWS_AS(bridge::adapter_forward(p, wrong, nn::Mode::kEval, unused),
                  DimensionError);
}

TEST_CASE("adapter: collected leaves carry the prefix and group") {
  Rng rng(5);
  AdapterParams p = bridge::make_adapter(3, 8, 12, 0.1, rng);
  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  bridge::collect_adapter(p, "adapter", "grp", params, buffers);
  REQUIRE(params.size() == 10);
  REQUIRE(buffers.size() == 4);
  CHECK(params[0].name == "adapter.l1.weight");
  CHECK(params[2].name == "adapter.bn1.gamma");
  CHECK(params[9].name == "adapter.l3.bias");
  for (const auto& pr : params) CHECK(pr.group == "grp");
  CHECK(buffers[0].name == "adapter.bn1.running_mean");
}

TEST_CASE("adapter backward matches finite differences") {
  Rng rng(6);
  AdapterParams p = bridge::make_adapter(3, 4, 5, 0.0, rng);
  Batch x{random_tensor(3, 6, rng), random_tensor(3, 6, rng)};
  Batch dy{random_tensor(5, 6, rng), random_tensor(5, 6, rng)};

  auto loss = [&] {
    AdapterParams copy = p;  // train forward moves running stats
    Rng unused(0);
    Batch out = bridge::adapter_forward(copy, x, nn::Mode::kTrain, unused);
    double s = 0.0;
    for (std::size_t b = 0; b < out.size(); ++b) {
      for (std::size_t i = 0; i < out[b].data.size(); ++i) {
        s += out[b].data[i] * dy[b].data[i];
      }
    }
    return s;
  };

  AdapterParams work = p;
  bridge::AdapterCache cache;
  Rng unused(0);
  bridge::adapter_forward(work, x, nn::Mode::kTrain, unused, &cache);
  nn::GradientSet grads;
  bridge::adapter_backward(p, cache, dy, "a", grads);

  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  bridge::collect_adapter(p, "a", "a", params, buffers);
  for (auto& pr : params) {
    Vec& g = grads[pr.name];
    REQUIRE(g.size() == pr.data->size());
    for (std::size_t i = 0; i < g.size(); i += 3) {
      double fd = oracle::central_diff(loss, (*pr.data)[i], 1e-5);
      CHECK(oracle::grad_error(g[i], fd) < 1e-4);
    }
  }
}

TEST_CASE("fixed transform: text asset round trip with comments") {
  oracle::TempDir dir("transform");
  std::string path = (dir / "toy_matrix.txt").string();
  {
    std::ofstream out(path);
    out << "# toy coefficients\n";
    for (int l = 0; l < 12; ++l) {
      out << l * 0.5 << " " << -l * 0.25 << " " << 1.0 << "  # row " << l << "\n";
    }
  }
  FixedLeadTransform t = bridge::load_fixed_transform(path);
  CHECK(t.name == "toy_matrix");
  CHECK(t.at(0, 0) == 0.0);
  CHECK(t.at(3, 0) == doctest::Approx(1.5));
  CHECK(t.at(11, 1) == doctest::Approx(-2.75));
  for (double v : t.intercept) CHECK(v == 0.0);
}

TEST_CASE("fixed transform: wrong coefficient count rejected") {
  oracle::TempDir dir("transform-bad");
  std::string path = (dir / "short.txt").string();
  {
    std::ofstream out(path);
    for (int i = 0; i < 35; ++i) out << "0.1 ";
  }
  CHECK_THROWS_AS(bridge::load_fixed_transform(path), IoError);
  CHECK_THROWS_AS(bridge::load_fixed_transform((dir / "absent.txt").string()), IoError);
}

TEST_CASE("apply fixed transform: zero matrix and naive product oracle") {
  Rng rng(7);
  FixedLeadTransform zero;
  Tensor2 x = random_tensor(3, 30, rng);
  Tensor2 y = bridge::apply_fixed_transform(zero, x);
  for (double v : y.data) CHECK(v == 0.0);

  FixedLeadTransform t;
  for (double& v : t.matrix) v = rng.gaussian();
  for (double& v : t.intercept) v = rng.gaussian();
  Tensor2 got = bridge::apply_fixed_transform(t, x);
  for (int l = 0; l < 12; ++l) {
    for (int s = 0; s < 30; ++s) {
      double want = t.intercept[static_cast<std::size_t>(l)];
      for (int j = 0; j < 3; ++j) want += t.at(l, j) * x.at(j, s);
      CHECK(std::abs(got.at(l, s) - want) < 1e-7);
    }
  }

  Tensor2 wrong = random_tensor(4, 30, rng);
  CHECK_THROWS_AS(bridge::apply_fixed_transform(t, wrong), DimensionError);
}

TEST_CASE("apply fixed transform: Einthoven rows recover lead III") {
  FixedLeadTransform t;
  t.at(0, 0) = 1.0;                    // I
  t.at(1, 1) = 1.0;                    // II
  t.at(2, 0) = -1.0;
  t.at(2, 1) = 1.0;                    // III = II - I
  Rng rng(8);
  Tensor2 x = random_tensor(3, 10, rng);
  Tensor2 y = bridge::apply_fixed_transform(t, x);
  for (int s = 0; s < 10; ++s) {
    CHECK(y.at(0, s) == doctest::Approx(x.at(0, s)));
    CHECK(y.at(2, s) == doctest::Approx(x.at(1, s) - x.at(0, s)).epsilon(1e-12));
  }
}

TEST_CASE("least squares: recovers an exact affine map") {
  Rng rng(9);
  FixedLeadTransform truth;
  for (double& v : truth.matrix) v = rng.gaussian();
  for (double& v : truth.intercept) v = rng.gaussian();
  Batch inputs, targets;
  for (int w = 0; w < 8; ++w) {
    Tensor2 x = random_tensor(3, 50, rng);
    inputs.push_back(x);
    targets.push_back(bridge::apply_fixed_transform(truth, x));
  }
  FixedLeadTransform fit = bridge::least_squares_fit(inputs, targets);
  for (std::size_t i = 0; i < 36; ++i) {
    CHECK(std::abs(fit.matrix[i] - truth.matrix[i]) < 1e-6);
  }
  for (std::size_t l = 0; l < 12; ++l) {
    CHECK(std::abs(fit.intercept[l] - truth.intercept[l]) < 1e-6);
  }
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t w = 0; w < inputs.size(); ++w) {
    Tensor2 pred = bridge::apply_fixed_transform(fit, inputs[w]);
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
      double d = pred.data[i] - targets[w].data[i];
      sq += d * d;
      ++n;
    }
  }
  CHECK(std::sqrt(sq / static_cast<double>(n)) < 1e-9);
}

TEST_CASE("least squares: self-regression puts unit weight on the copied lead") {
  Rng rng(10);
  Batch inputs, targets;
  for (int w = 0; w < 4; ++w) {
    Tensor2 x = random_tensor(3, 60, rng);
    Tensor2 y(12, 60);
    for (int l = 0; l < 12; ++l) {
      for (int s = 0; s < 60; ++s) y.at(l, s) = x.at(1, s);
    }
    inputs.push_back(x);
    targets.push_back(y);
  }
  FixedLeadTransform fit = bridge::least_squares_fit(inputs, targets);
  for (int l = 0; l < 12; ++l) {
    CHECK(std::abs(fit.at(l, 0)) < 1e-9);
    CHECK(std::abs(fit.at(l, 1) - 1.0) < 1e-9);
    CHECK(std::abs(fit.at(l, 2)) < 1e-9);
    CHECK(std::abs(fit.intercept[static_cast<std::size_t>(l)]) < 1e-9);
  }
}

TEST_CASE("least squares: pure-noise target drives coefficients to zero") {
  Rng rng(11);
  Batch inputs, targets;
  for (int w = 0; w < 10; ++w) {
    inputs.push_back(random_tensor(3, 10000, rng));
    targets.push_back(random_tensor(12, 10000, rng));
  }
  FixedLeadTransform fit = bridge::least_squares_fit(inputs, targets);
  for (double c : fit.matrix) CHECK(std::abs(c) < 0.05);
}

TEST_CASE("least squares: duplicated input lead is rank deficient") {
  Rng rng(12);
  Batch inputs, targets;
  Tensor2 x = random_tensor(3, 100, rng);
  for (int s = 0; s < 100; ++s) x.at(2, s) = x.at(0, s);
  inputs.push_back(x);
  targets.push_back(random_tensor(12, 100, rng));
  CHECK_THROWS_AS(bridge::least_squares_fit(inputs, targets), RuntimeError);
}

TEST_CASE("least squares dominates any fixed matrix in training rmse per lead") {
  Rng rng(13);
  Batch inputs, targets;
  for (int w = 0; w < 6; ++w) {
    Tensor2 x = random_tensor(3, 80, rng);
    Tensor2 y = random_tensor(12, 80, rng);
    // give the targets some linear structure plus noise
    for (int l = 0; l < 12; ++l) {
      for (int s = 0; s < 80; ++s) y.at(l, s) += 0.8 * x.at(l % 3, s);
    }
    inputs.push_back(x);
    targets.push_back(y);
  }
  FixedLeadTransform fit = bridge::least_squares_fit(inputs, targets);
  FixedLeadTransform rival;
  for (double& v : rival.matrix) v = rng.gaussian();

  auto per_lead_sq = [&](const FixedLeadTransform& t, int lead) {
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t w = 0; w < inputs.size(); ++w) {
      Tensor2 pred = bridge::apply_fixed_transform(t, inputs[w]);
      for (int s = 0; s < inputs[w].samples; ++s) {
        double d = pred.at(lead, s) - targets[w].at(lead, s);
        sq += d * d;
        ++n;
      }
    }
    return sq / static_cast<double>(n);
  };
  for (int l = 0; l < 12; ++l) {
    CHECK(per_lead_sq(fit, l) <= per_lead_sq(rival, l) + 1e-12);
  }
}

TEST_CASE("pretrain: lr zero leaves every learnable leaf at initialization") {
  Rng rng(14);
  AdapterParams init = bridge::make_adapter(3, 6, 12, 0.1, rng);
  Batch tx, ty;
  for (int w = 0; w < 8; ++w) {
    tx.push_back(random_tensor(3, 15, rng));
    ty.push_back(random_tensor(12, 15, rng));
  }
  Batch vx{random_tensor(3, 15, rng)}, vy{random_tensor(12, 15, rng)};
  bridge::PretrainConfig cfg;
  cfg.lr = 0.0;
  cfg.weight_decay = 0.0;
  cfg.max_epochs = 3;
  cfg.min_epochs = 0;
  cfg.warmup_epochs = 1;
  cfg.batch_size = 4;
  cfg.grad_accum = 1;
  bridge::PretrainResult res = bridge::pretrain_adapter(init, tx, ty, vx, vy, cfg);

  AdapterParams got = res.params;
  AdapterParams want = init;
  auto a = learnable_leaves(got);
  auto b = learnable_leaves(want);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
}

TEST_CASE("pretrain: zero epoch budget returns the initialization untouched") {
  Rng rng(15);
  AdapterParams init = bridge::make_adapter(3, 4, 12, 0.0, rng);
  Batch tx{random_tensor(3, 10, rng)}, ty{random_tensor(12, 10, rng)};
  bridge::PretrainConfig cfg;
  cfg.max_epochs = 0;
  cfg.min_epochs = 0;
  cfg.warmup_epochs = 0;
  bridge::PretrainResult res = bridge::pretrain_adapter(init, tx, ty, tx, ty, cfg);
  CHECK(res.log.empty());
  CHECK(res.best_epoch == -1);
  AdapterParams got = res.params;
  AdapterParams want = init;
  auto a = learnable_leaves(got);
  auto b = learnable_leaves(want);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  CHECK(got.bn1.running_mean == want.bn1.running_mean);
  CHECK(got.bn2.running_var == want.bn2.running_var);
}

TEST_CASE("pretrain: ample patience runs the full epoch budget") {
  Rng rng(16);
  AdapterParams init = bridge::make_adapter(3, 4, 12, 0.0, rng);
  Batch tx, ty;
  for (int w = 0; w < 6; ++w) {
    tx.push_back(random_tensor(3, 12, rng));
    ty.push_back(random_tensor(12, 12, rng));
  }
  bridge::PretrainConfig cfg;
  cfg.max_epochs = 7;
  cfg.min_epochs = 0;
  cfg.warmup_epochs = 2;
  cfg.early_stop_patience = 100;
  cfg.batch_size = 6;
  cfg.grad_accum = 1;
  bridge::PretrainResult res = bridge::pretrain_adapter(init, tx, ty, tx, ty, cfg);
  CHECK(res.log.size() == 7);
  for (std::size_t e = 0; e < res.log.size(); ++e) {
    CHECK(res.log[e].epoch == static_cast<int>(e));
  }
}

TEST_CASE("pretrain: returned checkpoint reproduces the logged best val loss") {
  Rng rng(17);
  AdapterParams init = bridge::make_adapter(3, 8, 12, 0.1, rng);
  Batch tx, ty, vx, vy;
  FixedLeadTransform m;
  for (double& v : m.matrix) v = rng.gaussian();
  for (int w = 0; w < 20; ++w) {
    Tensor2 x = random_tensor(3, 20, rng);
    (w < 16 ? tx : vx).push_back(x);
    (w < 16 ? ty : vy).push_back(bridge::apply_fixed_transform(m, x));
  }
  bridge::PretrainConfig cfg;
  cfg.max_epochs = 6;
  cfg.min_epochs = 0;
  cfg.warmup_epochs = 1;
  cfg.batch_size = 8;
  cfg.grad_accum = 2;
  cfg.seed = 5;
  bridge::PretrainResult res = bridge::pretrain_adapter(init, tx, ty, vx, vy, cfg);
  REQUIRE(!res.log.empty());
  double best = res.log[static_cast<std::size_t>(res.best_epoch)].val_loss;
  CHECK(best == res.best_val_loss);
  double re_eval = bridge::pretrain_val_loss(res.params, vx, vy, cfg.smooth_l1_beta);
  CHECK(re_eval == res.best_val_loss);  // bit-for-bit
}

TEST_CASE("pretrain: accumulated micro-batches equal one full-batch step") {
  // Windows are time permutations of one base pair, so batch statistics and
  // per-window gradients are composition-invariant and the only difference
  // between the two runs is the accumulation bookkeeping itself.
  Rng rng(18);
  AdapterParams init = bridge::make_adapter(3, 5, 12, 0.0, rng);
  Tensor2 bx = random_tensor(3, 16, rng);
  Tensor2 by = random_tensor(12, 16, rng);
  Batch tx, ty;
  for (int w = 0; w < 6; ++w) {
    std::vector<int> perm(16);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> order(perm.begin(), perm.end());
    shuffle_in_place(order, rng);
    Tensor2 px(3, 16), py(12, 16);
    for (int t = 0; t < 16; ++t) {
      for (int c = 0; c < 3; ++c) px.at(c, t) = bx.at(c, static_cast<int>(order[static_cast<std::size_t>(t)]));
      for (int c = 0; c < 12; ++c) py.at(c, t) = by.at(c, static_cast<int>(order[static_cast<std::size_t>(t)]));
    }
    tx.push_back(px);
    ty.push_back(py);
  }
  Batch vx{bx}, vy{by};

  bridge::PretrainConfig full;
  full.max_epochs = 1;
  full.min_epochs = 0;
  full.warmup_epochs = 0;
  full.batch_size = 6;
  full.grad_accum = 1;
  full.seed = 3;
  bridge::PretrainConfig micro = full;
  micro.batch_size = 4;  // micro-batches of 4 and 2, same effective batch
  micro.grad_accum = 2;

  bridge::PretrainResult a = bridge::pretrain_adapter(init, tx, ty, vx, vy, full);
  bridge::PretrainResult b = bridge::pretrain_adapter(init, tx, ty, vx, vy, micro);
  auto la = learnable_leaves(a.params);
  auto lb = learnable_leaves(b.params);
  REQUIRE(la.size() == lb.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(std::abs(*la[i] - *lb[i]) < 1e-6);
  }
}

TEST_CASE("pretrain: fixed linear target converges below 1e-2 rmse") {
  Rng rng(19);
  FixedLeadTransform m;
  for (double& v : m.matrix) v = rng.gaussian() * 0.5;
  AdapterParams init = bridge::make_adapter(3, 24, 12, 0.0, rng);
  Batch tx, ty, vx, vy;
  for (int w = 0; w < 440; ++w) {
    Tensor2 x = random_tensor(3, 24, rng);
    Tensor2 y = bridge::apply_fixed_transform(m, x);
    if (w < 400) {
      tx.push_back(std::move(x));
      ty.push_back(std::move(y));
    } else {
      vx.push_back(std::move(x));
      vy.push_back(std::move(y));
    }
  }
  bridge::PretrainConfig cfg;
  cfg.lr = 5e-3;
  cfg.max_epochs = 60;
  cfg.min_epochs = 0;
  cfg.warmup_epochs = 3;
  cfg.early_stop_patience = 60;
  cfg.plateau_patience = 8;
  cfg.batch_size = 50;
  cfg.grad_accum = 1;
  cfg.seed = 7;
  bridge::PretrainResult res = bridge::pretrain_adapter(init, tx, ty, vx, vy, cfg);

  double sq = 0.0;
  std::size_t n = 0;
  Batch pred = bridge::adapter_forward_eval(res.params, vx);
  for (std::size_t w = 0; w < pred.size(); ++w) {
    for (std::size_t i = 0; i < pred[w].data.size(); ++i) {
      double d = pred[w].data[i] - vy[w].data[i];
      sq += d * d;
      ++n;
    }
  }
  double rmse = std::sqrt(sq / static_cast<double>(n));
  CHECK(rmse < 1e-2);
}

TEST_SUITE_END();
