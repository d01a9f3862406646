#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "e2oal/dirichlet.hpp"
#include "e2oal/rng.hpp"
#include "e2oal/types.hpp"

namespace e2oal {

// Shared one-hidden-layer encoder (tanh) with a k-way primary head and an
// aux_classes-way auxiliary head. Parameters live in one flat vector in the
// order W_enc, b_enc, W_pri, b_pri, W_aux, b_aux so gradient checking and
// SGD can treat the model as a single coordinate vector.
class DualHeadModel {
 public:
  DualHeadModel() = default;
  DualHeadModel(int input_dim, int hidden_dim, int k, int aux_classes, double gamma,
                double logit_clamp = 30.0)
      : input_dim_(input_dim),
        hidden_dim_(hidden_dim),
        k_(k),
        aux_classes_(aux_classes),
        gamma_(gamma),
        logit_clamp_(logit_clamp) {
    if (input_dim < 1 || hidden_dim < 1 || k < 1 || aux_classes < k)
      throw std::invalid_argument("bad model dimensions");
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
    o_enc_w_ = 0;
    o_enc_b_ = o_enc_w_ + hidden_dim_ * input_dim_;
    o_pri_w_ = o_enc_b_ + hidden_dim_;
    o_pri_b_ = o_pri_w_ + k_ * hidden_dim_;
    o_aux_w_ = o_pri_b_ + k_;
    o_aux_b_ = o_aux_w_ + aux_classes_ * hidden_dim_;
    params_.assign(o_aux_b_ + aux_classes_, 0.0);
  }

  void init_weights(RngStream& rng) {
    auto fill = [&](std::size_t off, std::size_t count, int fan_in) {
      double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < count; ++i) params_[off + i] = scale * rng.gaussian();
    };
    fill(o_enc_w_, static_cast<std::size_t>(hidden_dim_) * input_dim_, input_dim_);
    fill(o_pri_w_, static_cast<std::size_t>(k_) * hidden_dim_, hidden_dim_);
    fill(o_aux_w_, static_cast<std::size_t>(aux_classes_) * hidden_dim_, hidden_dim_);
    // biases stay zero
  }

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  int k() const { return k_; }
  int aux_classes() const { return aux_classes_; }
  double gamma() const { return gamma_; }
  double logit_clamp() const { return logit_clamp_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  void encode(std::span<const double> x, std::span<double> hidden) const {
    const double* w = params_.data() + o_enc_w_;
    const double* b = params_.data() + o_enc_b_;
    for (int j = 0; j < hidden_dim_; ++j) {
      double z = b[j];
      const double* wj = w + static_cast<std::size_t>(j) * input_dim_;
      for (int i = 0; i < input_dim_; ++i) z += wj[i] * x[i];
      hidden[j] = std::tanh(z);
    }
  }

  void head(std::span<const double> hidden, bool aux, std::span<double> logits) const {
    const int n = aux ? aux_classes_ : k_;
    const double* w = params_.data() + (aux ? o_aux_w_ : o_pri_w_);
    const double* b = params_.data() + (aux ? o_aux_b_ : o_pri_b_);
    for (int c = 0; c < n; ++c) {
      double z = b[c];
      const double* wc = w + static_cast<std::size_t>(c) * hidden_dim_;
      for (int j = 0; j < hidden_dim_; ++j) z += wc[j] * hidden[j];
      logits[c] = z;
    }
  }

  std::vector<double> primary_logits(std::span<const double> x) const {
    std::vector<double> h(hidden_dim_), o(k_);
    encode(x, h);
    head(h, false, o);
    return o;
  }

  std::vector<double> aux_logits(std::span<const double> x) const {
    std::vector<double> h(hidden_dim_), o(aux_classes_);
    encode(x, h);
    head(h, true, o);
    return o;
  }

  bool finite() const {
    for (double v : params_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::size_t off_enc_w() const { return o_enc_w_; }
  std::size_t off_enc_b() const { return o_enc_b_; }
  std::size_t off_pri_w() const { return o_pri_w_; }
  std::size_t off_pri_b() const { return o_pri_b_; }
  std::size_t off_aux_w() const { return o_aux_w_; }
  std::size_t off_aux_b() const { return o_aux_b_; }

 private:
  int input_dim_ = 0, hidden_dim_ = 0, k_ = 0, aux_classes_ = 0;
  double gamma_ = 1.0, logit_clamp_ = 30.0;
  std::size_t o_enc_w_ = 0, o_enc_b_ = 0, o_pri_w_ = 0, o_pri_b_ = 0, o_aux_w_ = 0,
              o_aux_b_ = 0;
  std::vector<double> params_;
};

// One labeled sample: known samples carry a class in [0,k) and contribute
// CE on the primary head plus EDL on the auxiliary head; unknown samples
// carry a proxy class in [k, aux_classes) and contribute EDL only.
struct TrainSample {
  std::size_t row = 0;
  bool known = false;
  int label = 0;
};

inline std::vector<double> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// ce_only trains the primary head alone (how the plain-AL baselines learn);
// dual adds the evidential objective on the auxiliary head.
enum class TrainMode { dual, ce_only };

// Mean of per-sample CE + (NLL + KL) over the batch, with the analytic
// gradient for every parameter. Weight decay is handled by the optimizer,
// not here, so finite differences of this function check the bare loss.
inline double total_loss(const DualHeadModel& model, const Matrix& features,
                         const std::vector<TrainSample>& batch,
                         std::vector<double>* grad_out = nullptr,
                         TrainMode mode = TrainMode::dual) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const int h = model.hidden_dim();
  const int k = model.k();
  const int a = model.aux_classes();
  const int d = model.input_dim();
  const auto& P = model.params();

  std::vector<double> grad;
  if (grad_out) grad.assign(P.size(), 0.0);

  std::vector<double> hid(h), op(k), oa(a), g_hid(h), g_op(k), g_oa(a);
  double loss_sum = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const TrainSample& s : batch) {
    auto x = features.row(s.row);
    model.encode(x, hid);
    model.head(hid, false, op);
    model.head(hid, true, oa);
    std::fill(g_op.begin(), g_op.end(), 0.0);
    std::fill(g_oa.begin(), g_oa.end(), 0.0);

    double sample_loss = 0.0;
    if (s.known) {
      if (s.label < 0 || s.label >= k) throw std::invalid_argument("class out of range");
      std::vector<double> p = softmax(op);
      sample_loss -= std::log(std::max(p[static_cast<std::size_t>(s.label)], 1e-300));
      if (grad_out)
        for (int c = 0; c < k; ++c)
          g_op[c] = p[static_cast<std::size_t>(c)] - (c == s.label ? 1.0 : 0.0);
    }
    if (mode == TrainMode::dual) {
      int aux_label = s.label;
      if (aux_label < 0 || aux_label >= a) throw std::invalid_argument("class out of range");
      EdlGrad edl = edl_loss_grad(oa, static_cast<std::size_t>(aux_label), model.gamma(),
                                  model.logit_clamp());
      sample_loss += edl.loss;
      if (grad_out)
        for (int c = 0; c < a; ++c) g_oa[c] = edl.d_logits[c];
    }
    loss_sum += sample_loss;

    if (!grad_out) continue;

    // Backprop through heads into the shared encoder.
    const double* wp = P.data() + model.off_pri_w();
    const double* wa = P.data() + model.off_aux_w();
    std::fill(g_hid.begin(), g_hid.end(), 0.0);
    for (int c = 0; c < k; ++c) {
      if (g_op[c] == 0.0) continue;
      double g = g_op[c] * inv_n;
      double* gw = grad.data() + model.off_pri_w() + static_cast<std::size_t>(c) * h;
      const double* wc = wp + static_cast<std::size_t>(c) * h;
      for (int j = 0; j < h; ++j) {
        gw[j] += g * hid[j];
        g_hid[j] += g * wc[j];
      }
      grad[model.off_pri_b() + static_cast<std::size_t>(c)] += g;
    }
    for (int c = 0; c < a; ++c) {
      if (g_oa[c] == 0.0) continue;
      double g = g_oa[c] * inv_n;
      double* gw = grad.data() + model.off_aux_w() + static_cast<std::size_t>(c) * h;
      const double* wc = wa + static_cast<std::size_t>(c) * h;
      for (int j = 0; j < h; ++j) {
        gw[j] += g * hid[j];
        g_hid[j] += g * wc[j];
      }
      grad[model.off_aux_b() + static_cast<std::size_t>(c)] += g;
    }
    for (int j = 0; j < h; ++j) {
      double gz = g_hid[j] * (1.0 - hid[j] * hid[j]);
      if (gz == 0.0) continue;
      double* gw = grad.data() + model.off_enc_w() + static_cast<std::size_t>(j) * d;
      for (int i = 0; i < d; ++i) gw[i] += gz * x[i];
      grad[model.off_enc_b() + static_cast<std::size_t>(j)] += gz;
    }
  }

  if (grad_out) *grad_out = std::move(grad);
  return loss_sum * inv_n;
}

// Mini-batch SGD with momentum, decoupled weight decay and step decay of
// the learning rate. The model is freshly initialized before training;
// nothing carries over between rounds.
inline DualHeadModel train_model(const Matrix& features,
                                 const std::vector<TrainSample>& samples, int input_dim,
                                 int k, int aux_classes, const RoundConfig& cfg,
                                 int round, TrainMode mode = TrainMode::dual) {
  if (samples.empty()) throw std::invalid_argument("nothing to train on");
  DualHeadModel model(input_dim, cfg.hidden_dim, k, aux_classes, cfg.gamma,
                      cfg.logit_clamp);
  // Init weights are drawn from a round-independent stream: encoder and
  // primary head start from the same values every round, which keeps the
  // purity landscape comparable across rounds while staying a fresh init.
  RngStream init_rng = derive_stream(cfg.seed, 0, "train-init");
  model.init_weights(init_rng);
  RngStream shuffle_rng =
      derive_stream(cfg.seed, static_cast<std::uint64_t>(round), "sgd-shuffle");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> velocity(model.params().size(), 0.0);
  std::vector<double> grad;
  std::vector<TrainSample> batch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.learning_rate *
                std::pow(cfg.lr_decay_factor, epoch / std::max(1, cfg.lr_decay_every));
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      total_loss(model, features, batch, &grad, mode);
      auto& p = model.params();
      for (std::size_t i = 0; i < p.size(); ++i) {
        double g = grad[i] + cfg.weight_decay * p[i];
        velocity[i] = cfg.momentum * velocity[i] + g;
        p[i] -= lr * velocity[i];
      }
    }
    if (!model.finite()) throw std::runtime_error("training diverged to non-finite parameters");
  }
  return model;
}

inline double primary_accuracy(const DualHeadModel& model, const Matrix& features,
                               const std::vector<std::size_t>& rows,
                               const std::vector<int>& labels) {
  if (rows.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> o = model.primary_logits(features.row(rows[i]));
    int arg = 0;
    for (int c = 1; c < model.k(); ++c)
      if (o[static_cast<std::size_t>(c)] > o[static_cast<std::size_t>(arg)]) arg = c;
    if (arg == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

}  // namespace e2oal
