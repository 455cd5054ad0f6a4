#include "nn/optim.hpp"

#include <cmath>

namespace cogadapt::nn {

void adamw_step(OptimizerState& st, const AdamwConfig& cfg,
                const std::vector<ParamRef>& params, const GradientSet& grads,
                const std::map<std::string, double>& lr_by_group,
                double lr_scale) {
  if (lr_scale < 0.0) throw ConfigError("adamw_step: negative schedule multiplier");
  st.step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));

  for (const ParamRef& p : params) {
    auto git = grads.find(p.name);
    if (git == grads.end()) continue;
    const Vec& g = git->second;
    if (g.size() != p.data->size()) {
      throw DimensionError("adamw_step: gradient size mismatch for " + p.name);
    }
    auto lit = lr_by_group.find(p.group);
    if (lit == lr_by_group.end()) {
      throw ConfigError("adamw_step: no learning rate for group '" + p.group + "'");
    }
    if (lit->second < 0.0) {
      throw ConfigError("adamw_step: negative learning rate for group '" + p.group + "'");
    }
    double lr = lit->second * lr_scale;

    auto& mom = st.moments[p.name];
    if (mom.m.empty()) {
      mom.m.assign(g.size(), 0.0);
      mom.v.assign(g.size(), 0.0);
    }
    double wd = (p.kind == ParamKind::kWeight) ? cfg.weight_decay : 0.0;
    Vec& w = *p.data;
    for (std::size_t i = 0; i < g.size(); ++i) {
      mom.m[i] = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * g[i];
      mom.v[i] = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      double mhat = mom.m[i] / bc1;
      double vhat = mom.v[i] / bc2;
      w[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.eps) + wd * w[i]);
    }
    require_finite(w, "adamw_step(" + p.name + ")");
  }
}

void kaiming_init(Vec& weight, int fan_in, Rng& rng) {
  if (fan_in <= 0) throw DimensionError("kaiming_init: fan_in must be positive");
  double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& w : weight) w = std_dev * rng.gaussian();
}

void PlateauState::observe(double val_loss, const ScheduleConfig& cfg) {
  if (!seen || val_loss < best) {
    best = val_loss;
    seen = true;
    since_improve = 0;
    return;
  }
  since_improve += 1;
  if (since_improve >= cfg.plateau_patience) {
    reductions += 1;
    since_improve = 0;
  }
}

double schedule_lr(const ScheduleConfig& cfg, double epoch,
                   const PlateauState* plateau) {
  if (cfg.total_epochs <= 0) throw ConfigError("schedule_lr: total_epochs must be positive");
  if (cfg.warmup_epochs < 0 || cfg.warmup_epochs >= cfg.total_epochs) {
    throw ConfigError("schedule_lr: warmup_epochs must lie in [0, total_epochs)");
  }
  if (epoch < 0.0 || epoch > static_cast<double>(cfg.total_epochs)) {
    throw ConfigError("schedule_lr: epoch outside [0, total_epochs]");
  }
  double lr;
  if (epoch < static_cast<double>(cfg.warmup_epochs)) {
    lr = cfg.eta_max * epoch / static_cast<double>(cfg.warmup_epochs);
  } else {
    double span = static_cast<double>(cfg.total_epochs - cfg.warmup_epochs);
    double phase = (epoch - static_cast<double>(cfg.warmup_epochs)) / span;
    lr = cfg.eta_min +
         0.5 * (cfg.eta_max - cfg.eta_min) * (1.0 + std::cos(phase * 3.14159265358979323846));
  }
  if (plateau && plateau->reductions > 0) {
    lr *= std::pow(cfg.plateau_factor, static_cast<double>(plateau->reductions));
  }
  return lr;
}

}  // namespace cogadapt::nn
