#include "emojipred/bilstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "emojipred/checkpoint.hpp"
#include "emojipred/metrics.hpp"

namespace emojipred {

using json = nlohmann::json;

void BiLstmDims::validate() const {
  if (text_vocab < 2 || hash_vocab < 2) throw InputError("vocabularies need at least <pad> and <unk>");
  if (source_vocab < 1) throw InputError("source vocabulary is empty");
  if (num_classes < 1) throw InputError("need at least one class");
  if (d < 1 || d_s < 1 || h < 1) throw InputError("embedding and hidden sizes must be positive");
}

template <typename T>
BiLstmParams<T> BiLstmParams<T>::zeros(const BiLstmDims& dims, const FeatureFlags& flags) {
  dims.validate();
  BiLstmParams p;
  p.dims = dims;
  p.flags = flags;
  const std::size_t d = dims.d, h = dims.h;
  p.text_emb.assign(dims.text_vocab * d, T(0));
  p.hash_emb.assign(dims.hash_vocab * d, T(0));
  p.src_emb.assign(static_cast<std::size_t>(dims.source_vocab) * dims.d_s, T(0));
  for (auto* dir : {&p.fwd, &p.bwd}) {
    dir->W.assign(4 * h * d, T(0));
    dir->U.assign(4 * h * h, T(0));
    dir->b.assign(4 * h, T(0));
  }
  p.out_W.assign(static_cast<std::size_t>(dims.num_classes) * p.feature_dim(), T(0));
  p.out_b.assign(dims.num_classes, T(0));
  return p;
}

template <typename T>
std::vector<std::pair<std::string, std::vector<T>*>> BiLstmParams<T>::tensors() {
  return {{"text_emb", &text_emb}, {"hash_emb", &hash_emb}, {"src_emb", &src_emb},
          {"fwd_W", &fwd.W},       {"fwd_U", &fwd.U},       {"fwd_b", &fwd.b},
          {"bwd_W", &bwd.W},       {"bwd_U", &bwd.U},       {"bwd_b", &bwd.b},
          {"out_W", &out_W},       {"out_b", &out_b}};
}

template <typename T>
std::vector<std::pair<std::string, const std::vector<T>*>> BiLstmParams<T>::tensors() const {
  auto mut = const_cast<BiLstmParams*>(this)->tensors();
  std::vector<std::pair<std::string, const std::vector<T>*>> out;
  for (auto& [n, t] : mut) out.emplace_back(n, t);
  return out;
}

template <typename T>
BiLstmParams<T> init_params(const BiLstmDims& dims, const FeatureFlags& flags,
                            std::uint64_t seed, double scale) {
  auto p = BiLstmParams<T>::zeros(dims, flags);
  Rng rng(seed);
  for (auto& [name, t] : p.tensors()) {
    for (auto& w : *t) w = static_cast<T>(rng.uniform(-scale, scale));
  }
  const std::size_t h = dims.h;
  for (auto* dir : {&p.fwd, &p.bwd}) {
    std::fill(dir->b.begin() + h, dir->b.begin() + 2 * h, T(1));
  }
  std::fill(p.text_emb.begin(), p.text_emb.begin() + dims.d, T(0));
  std::fill(p.hash_emb.begin(), p.hash_emb.begin() + dims.d, T(0));
  return p;
}

void check_example(const BiLstmDims& dims, const EncodedExample& ex) {
  if (ex.text_len < 0 || ex.text_len > static_cast<int>(ex.text_ids.size())) {
    throw InputError("text length out of range");
  }
  for (int i = 0; i < ex.text_len; ++i) {
    if (ex.text_ids[i] < 0 || ex.text_ids[i] >= dims.text_vocab) {
      throw InputError("text token id " + std::to_string(ex.text_ids[i]) + " out of range");
    }
  }
  for (int id : ex.hashtag_ids) {
    if (id < 0 || id >= dims.hash_vocab) {
      throw InputError("hashtag id " + std::to_string(id) + " out of range");
    }
  }
  if (ex.source_id < 0 || ex.source_id >= dims.source_vocab) {
    throw InputError("source id " + std::to_string(ex.source_id) + " out of range");
  }
  if (ex.label < 0 || ex.label >= dims.num_classes) {
    throw InputError("label " + std::to_string(ex.label) + " out of range");
  }
}

namespace {

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
void run_direction(const BiLstmParams<T>& p, const LstmWeights<T>& w, DirectionCache<T>& dc) {
  const int d = p.dims.d, h = p.dims.h;
  const int n = static_cast<int>(dc.order.size());
  dc.gates.assign(static_cast<std::size_t>(n) * 4 * h, T(0));
  dc.cells.assign(static_cast<std::size_t>(n) * h, T(0));
  dc.hidden.assign(static_cast<std::size_t>(n) * h, T(0));
  std::vector<T> zeros(h, T(0));
  std::vector<T> a(4 * h);
  for (int s = 0; s < n; ++s) {
    const T* x = &p.text_emb[static_cast<std::size_t>(dc.order[s]) * d];
    const T* h_prev = s > 0 ? &dc.hidden[(s - 1) * h] : zeros.data();
    const T* c_prev = s > 0 ? &dc.cells[(s - 1) * h] : zeros.data();
    for (int r = 0; r < 4 * h; ++r) {
      T acc = w.b[r];
      const T* wr = &w.W[static_cast<std::size_t>(r) * d];
      for (int j = 0; j < d; ++j) acc += wr[j] * x[j];
      const T* ur = &w.U[static_cast<std::size_t>(r) * h];
      for (int j = 0; j < h; ++j) acc += ur[j] * h_prev[j];
      a[r] = acc;
    }
    T* g = &dc.gates[static_cast<std::size_t>(s) * 4 * h];
    T* c = &dc.cells[static_cast<std::size_t>(s) * h];
    T* hid = &dc.hidden[static_cast<std::size_t>(s) * h];
    for (int k = 0; k < h; ++k) {
      g[k] = sigmoid(a[k]);
      g[h + k] = sigmoid(a[h + k]);
      g[2 * h + k] = std::tanh(a[2 * h + k]);
      g[3 * h + k] = sigmoid(a[3 * h + k]);
      c[k] = g[h + k] * c_prev[k] + g[k] * g[2 * h + k];
      hid[k] = g[3 * h + k] * std::tanh(c[k]);
    }
  }
}

template <typename T>
const T* last_hidden(const DirectionCache<T>& dc, int h) {
  return dc.order.empty() ? nullptr : &dc.hidden[(dc.order.size() - 1) * h];
}

}  // namespace

template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
  std::vector<T> out(logits.size());
  if (logits.empty()) return out;
  const T mx = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

template <typename T>
T cross_entropy(const std::vector<T>& logits, ClassId label) {
  const T mx = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (T l : logits) sum += std::exp(l - mx);
  return mx + std::log(sum) - logits[label];
}

template <typename T>
ForwardCache<T> forward(const BiLstmParams<T>& p, const EncodedExample& ex) {
  check_example(p.dims, ex);
  const int d = p.dims.d, h = p.dims.h, ds = p.dims.d_s;
  ForwardCache<T> cache;
  cache.fwd.order.assign(ex.text_ids.begin(), ex.text_ids.begin() + ex.text_len);
  cache.bwd.order.assign(cache.fwd.order.rbegin(), cache.fwd.order.rend());
  run_direction(p, p.fwd, cache.fwd);
  run_direction(p, p.bwd, cache.bwd);

  const int F = p.feature_dim();
  cache.features.assign(F, T(0));
  if (const T* hf = last_hidden(cache.fwd, h)) std::copy(hf, hf + h, cache.features.begin());
  if (const T* hb = last_hidden(cache.bwd, h)) std::copy(hb, hb + h, cache.features.begin() + h);
  int off = 2 * h;
  if (p.flags.use_hashtags) {
    cache.hashtag_ids = ex.hashtag_ids;
    if (!ex.hashtag_ids.empty()) {
      const T inv = T(1) / static_cast<T>(ex.hashtag_ids.size());
      for (int id : ex.hashtag_ids) {
        const T* e = &p.hash_emb[static_cast<std::size_t>(id) * d];
        for (int j = 0; j < d; ++j) cache.features[off + j] += e[j] * inv;
      }
    }
    off += d;
  }
  cache.source_id = ex.source_id;
  if (p.flags.use_source) {
    const T* e = &p.src_emb[static_cast<std::size_t>(ex.source_id) * ds];
    std::copy(e, e + ds, cache.features.begin() + off);
  }

  const int C = p.dims.num_classes;
  cache.logits.assign(C, T(0));
  for (int c = 0; c < C; ++c) {
    T acc = p.out_b[c];
    const T* wr = &p.out_W[static_cast<std::size_t>(c) * F];
    for (int j = 0; j < F; ++j) acc += wr[j] * cache.features[j];
    cache.logits[c] = acc;
  }
  cache.probs = softmax(cache.logits);
  return cache;
}

template <typename T>
std::vector<ForwardCache<T>> forward(const BiLstmParams<T>& params,
                                     const std::vector<EncodedExample>& batch) {
  std::vector<ForwardCache<T>> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) out.push_back(forward(params, ex));
  return out;
}

template <typename T>
T mean_loss(const std::vector<ForwardCache<T>>& caches, const std::vector<EncodedExample>& batch) {
  if (caches.empty()) return T(0);
  T total = 0;
  for (std::size_t i = 0; i < caches.size(); ++i) total += cross_entropy(caches[i].logits, batch[i].label);
  return total / static_cast<T>(caches.size());
}

namespace {

// Backpropagates dh_final through one direction, accumulating into grad.
template <typename T>
void backprop_direction(const BiLstmParams<T>& p, const LstmWeights<T>& w,
                        const DirectionCache<T>& dc, const T* dh_final, LstmWeights<T>& gw,
                        std::vector<T>& g_emb, const BackwardOptions& opt) {
  const int d = p.dims.d, h = p.dims.h;
  const int n = static_cast<int>(dc.order.size());
  if (n == 0) return;
  std::vector<T> dh(dh_final, dh_final + h), dc_next(h, T(0)), da(4 * h), dh_prev(h);
  std::vector<T> zeros(h, T(0));
  for (int s = n - 1; s >= 0; --s) {
    const T* g = &dc.gates[static_cast<std::size_t>(s) * 4 * h];
    const T* c = &dc.cells[static_cast<std::size_t>(s) * h];
    const T* c_prev = s > 0 ? &dc.cells[(s - 1) * h] : zeros.data();
    const T* h_prev = s > 0 ? &dc.hidden[(s - 1) * h] : zeros.data();
    for (int k = 0; k < h; ++k) {
      const T i = g[k], f = g[h + k], gg = g[2 * h + k], o = g[3 * h + k];
      const T tc = std::tanh(c[k]);
      const T dout = dh[k] * tc;
      const T dcell = dc_next[k] + dh[k] * o * (T(1) - tc * tc);
      const T di = dcell * gg;
      const T dg = dcell * i;
      T df = dcell * c_prev[k];
      if (opt.negate_forget_gate_term) df = -df;
      dc_next[k] = dcell * f;
      da[k] = di * i * (T(1) - i);
      da[h + k] = df * f * (T(1) - f);
      da[2 * h + k] = dg * (T(1) - gg * gg);
      da[3 * h + k] = dout * o * (T(1) - o);
    }
    const std::size_t tok = static_cast<std::size_t>(dc.order[s]);
    const T* x = &p.text_emb[tok * d];
    T* gx = &g_emb[tok * d];
    std::fill(dh_prev.begin(), dh_prev.end(), T(0));
    for (int r = 0; r < 4 * h; ++r) {
      const T a = da[r];
      gw.b[r] += a;
      T* gwr = &gw.W[static_cast<std::size_t>(r) * d];
      const T* wr = &w.W[static_cast<std::size_t>(r) * d];
      for (int j = 0; j < d; ++j) {
        gwr[j] += a * x[j];
        gx[j] += a * wr[j];
      }
      T* gur = &gw.U[static_cast<std::size_t>(r) * h];
      const T* ur = &w.U[static_cast<std::size_t>(r) * h];
      for (int j = 0; j < h; ++j) {
        gur[j] += a * h_prev[j];
        dh_prev[j] += a * ur[j];
      }
    }
    dh.swap(dh_prev);
  }
}

}  // namespace

template <typename T>
BiLstmParams<T> backward(const BiLstmParams<T>& p, const std::vector<ForwardCache<T>>& caches,
                         const std::vector<EncodedExample>& batch, const BackwardOptions& opt) {
  auto grad = BiLstmParams<T>::zeros(p.dims, p.flags);
  if (caches.empty()) return grad;
  const int d = p.dims.d, h = p.dims.h, ds = p.dims.d_s, C = p.dims.num_classes;
  const int F = p.feature_dim();
  const T scale = T(1) / static_cast<T>(caches.size());
  std::vector<T> dlogits(C), dz(F);
  for (std::size_t b = 0; b < caches.size(); ++b) {
    const auto& cache = caches[b];
    for (int c = 0; c < C; ++c) {
      dlogits[c] = (cache.probs[c] - (c == batch[b].label ? T(1) : T(0))) * scale;
    }
    std::fill(dz.begin(), dz.end(), T(0));
    for (int c = 0; c < C; ++c) {
      grad.out_b[c] += dlogits[c];
      T* gr = &grad.out_W[static_cast<std::size_t>(c) * F];
      const T* wr = &p.out_W[static_cast<std::size_t>(c) * F];
      for (int j = 0; j < F; ++j) {
        gr[j] += dlogits[c] * cache.features[j];
        dz[j] += dlogits[c] * wr[j];
      }
    }
    backprop_direction(p, p.fwd, cache.fwd, dz.data(), grad.fwd, grad.text_emb, opt);
    backprop_direction(p, p.bwd, cache.bwd, dz.data() + h, grad.bwd, grad.text_emb, opt);
    int off = 2 * h;
    if (p.flags.use_hashtags) {
      if (!cache.hashtag_ids.empty()) {
        const T inv = T(1) / static_cast<T>(cache.hashtag_ids.size());
        for (int id : cache.hashtag_ids) {
          T* ge = &grad.hash_emb[static_cast<std::size_t>(id) * d];
          for (int j = 0; j < d; ++j) ge[j] += dz[off + j] * inv;
        }
      }
      off += d;
    }
    if (p.flags.use_source) {
      T* ge = &grad.src_emb[static_cast<std::size_t>(cache.source_id) * ds];
      for (int j = 0; j < ds; ++j) ge[j] += dz[off + j];
    }
  }
  std::fill(grad.text_emb.begin(), grad.text_emb.begin() + d, T(0));
  std::fill(grad.hash_emb.begin(), grad.hash_emb.begin() + d, T(0));
  return grad;
}

GradCheckResult grad_check(const BiLstmParams<double>& params,
                           const std::vector<EncodedExample>& batch, double eps,
                           const BackwardOptions& options, std::size_t max_entries_per_tensor,
                           std::uint64_t seed) {
  BiLstmParams<double> p = params;
  const auto grad = backward(p, forward(p, batch), batch, options);
  const auto grad_tensors = grad.tensors();
  auto tensors = p.tensors();
  GradCheckResult result;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto& [name, values] = tensors[t];
    const auto& analytic = *grad_tensors[t].second;
    std::vector<std::size_t> entries(values->size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (max_entries_per_tensor > 0 && entries.size() > max_entries_per_tensor) {
      Rng rng(derive_seed(seed, t));
      rng.shuffle(entries);
      entries.resize(max_entries_per_tensor);
    }
    double worst = 0.0;
    for (std::size_t idx : entries) {
      const double saved = (*values)[idx];
      (*values)[idx] = saved + eps;
      const double up = mean_loss(forward(p, batch), batch);
      (*values)[idx] = saved - eps;
      const double down = mean_loss(forward(p, batch), batch);
      (*values)[idx] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    result.per_tensor.emplace_back(name, worst);
    if (worst > result.max_rel_error || result.worst_tensor.empty()) {
      result.max_rel_error = worst;
      result.worst_tensor = name;
    }
  }
  return result;
}

template <typename T>
Prediction predict(const BiLstmParams<T>& params, const EncodedExample& ex) {
  const auto cache = forward(params, ex);
  Prediction pred;
  pred.scores.assign(cache.probs.begin(), cache.probs.end());
  pred.label = argmax(std::vector<double>(cache.logits.begin(), cache.logits.end()));
  return pred;
}

void TrainConfig::validate() const {
  if (d < 1 || d_s < 1 || h < 1) throw InputError("neural dims must be positive");
  if (!(learning_rate > 0)) throw InputError("neural learning rate must be positive");
  if (batch_size < 1) throw InputError("batch size must be positive");
  if (max_epochs < 1) throw InputError("max epochs must be positive");
  if (patience < 0) throw InputError("patience must be >= 0");
  if (!(clip_norm > 0)) throw InputError("clip norm must be positive");
  if (!(init_scale > 0)) throw InputError("init scale must be positive");
}

BiLstmDims make_dims(const VocabSizes& sizes, const TrainConfig& config) {
  BiLstmDims dims;
  dims.text_vocab = sizes.text;
  dims.hash_vocab = sizes.hashtags;
  dims.source_vocab = sizes.sources;
  dims.num_classes = sizes.classes;
  dims.d = config.d;
  dims.d_s = config.d_s;
  dims.h = config.h;
  return dims;
}

namespace {

struct DevScore {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

DevScore score(const BiLstmParams<float>& p, const std::vector<EncodedExample>& data) {
  std::vector<ClassId> preds, golds;
  preds.reserve(data.size());
  golds.reserve(data.size());
  for (const auto& ex : data) {
    preds.push_back(predict(p, ex).label);
    golds.push_back(ex.label);
  }
  const auto m = evaluate_predictions(preds, golds, p.dims.num_classes);
  return {m.accuracy, m.macro_f1};
}

}  // namespace

TrainResult train_bilstm(const std::vector<EncodedExample>& train,
                         const std::vector<EncodedExample>& dev, const VocabSizes& sizes,
                         const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw InputError("training split is empty");
  const BiLstmDims dims = make_dims(sizes, config);
  for (const auto& ex : train) check_example(dims, ex);
  for (const auto& ex : dev) check_example(dims, ex);

  TrainResult result;
  const auto& dev_set = dev.empty() ? train : dev;
  if (dev.empty()) result.warnings.push_back("dev split is empty; early stopping uses the training split");

  auto params = init_params<float>(dims, config.flags, derive_seed(config.seed, 0), config.init_scale);
  auto m = BiLstmParams<float>::zeros(dims, config.flags);
  auto v = m;
  const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
  const float lr = static_cast<float>(config.learning_rate);
  long step = 0;

  result.params = params;
  double best_f1 = -1.0;
  int bad_epochs = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EncodedExample> batch;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const auto caches = forward(params, batch);
      const float loss = mean_loss(caches, batch);
      if (!std::isfinite(loss)) {
        throw Error("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(start / config.batch_size) +
                    "; try a smaller learning rate");
      }
      loss_sum += static_cast<double>(loss) * static_cast<double>(batch.size());
      auto grad = backward(params, caches, batch);

      auto gt = grad.tensors();
      double norm2 = 0.0;
      for (auto& [n, t] : gt) {
        for (float g : *t) norm2 += static_cast<double>(g) * g;
      }
      const double norm = std::sqrt(norm2);
      const float clip = norm > config.clip_norm ? static_cast<float>(config.clip_norm / norm) : 1.0f;

      ++step;
      const float c1 = 1.0f - std::pow(b1, static_cast<float>(step));
      const float c2 = 1.0f - std::pow(b2, static_cast<float>(step));
      auto pt = params.tensors();
      auto mt = m.tensors();
      auto vt = v.tensors();
      for (std::size_t k = 0; k < pt.size(); ++k) {
        auto& P = *pt[k].second;
        auto& M = *mt[k].second;
        auto& V = *vt[k].second;
        const auto& G = *gt[k].second;
        for (std::size_t i = 0; i < P.size(); ++i) {
          const float g = G[i] * clip;
          M[i] = b1 * M[i] + (1 - b1) * g;
          V[i] = b2 * V[i] + (1 - b2) * g * g;
          P[i] -= lr * (M[i] / c1) / (std::sqrt(V[i] / c2) + eps);
        }
      }
    }

    const DevScore s = score(params, dev_set);
    result.history.push_back({epoch, loss_sum / static_cast<double>(train.size()), s.accuracy,
                              s.macro_f1});
    if (s.macro_f1 > best_f1) {
      best_f1 = s.macro_f1;
      bad_epochs = 0;
      result.params = params;
      result.best_epoch = epoch;
    } else if (++bad_epochs >= std::max(config.patience, 1)) {
      break;
    }
  }
  return result;
}

void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write history: " + path.string());
  out << "epoch,train_loss,dev_acc,dev_macro_f1\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << format_fixed(r.train_loss, 6) << ',' << format_fixed(r.dev_acc, 6)
        << ',' << format_fixed(r.dev_macro_f1, 6) << '\n';
  }
}

void save_bilstm(const std::filesystem::path& path, const BiLstmParams<float>& params,
                 const json& extra) {
  const auto& dims = params.dims;
  json header = {{"model", "bilstm"},
                 {"dims",
                  {{"text_vocab", dims.text_vocab},
                   {"hash_vocab", dims.hash_vocab},
                   {"source_vocab", dims.source_vocab},
                   {"num_classes", dims.num_classes},
                   {"d", dims.d},
                   {"d_s", dims.d_s},
                   {"h", dims.h}}},
                 {"flags",
                  {{"use_hashtags", params.flags.use_hashtags},
                   {"use_source", params.flags.use_source}}},
                 {"extra", extra}};
  checkpoint::Writer w(header);
  for (const auto& [name, t] : params.tensors()) w.add(name, std::span<const float>(*t));
  w.write(path);
}

BiLstmParams<float> load_bilstm(const std::filesystem::path& path, json* extra) {
  const auto r = checkpoint::Reader::open(path);
  const auto& h = r.header();
  if (h.value("model", "") != "bilstm") throw ConsistencyError("checkpoint is not a BiLSTM model: " + path.string());
  BiLstmDims dims;
  const auto& jd = h.at("dims");
  dims.text_vocab = jd.at("text_vocab");
  dims.hash_vocab = jd.at("hash_vocab");
  dims.source_vocab = jd.at("source_vocab");
  dims.num_classes = jd.at("num_classes");
  dims.d = jd.at("d");
  dims.d_s = jd.at("d_s");
  dims.h = jd.at("h");
  FeatureFlags flags;
  flags.use_hashtags = h.at("flags").at("use_hashtags");
  flags.use_source = h.at("flags").at("use_source");
  auto p = BiLstmParams<float>::zeros(dims, flags);
  for (auto& [name, t] : p.tensors()) {
    auto data = r.f32(name);
    if (data.size() != t->size()) throw ConsistencyError("tensor '" + name + "' has the wrong size");
    *t = std::move(data);
  }
  if (extra) *extra = h.value("extra", json::object());
  return p;
}

json to_json(const TrainConfig& c) {
  return {{"d", c.d},
          {"d_s", c.d_s},
          {"h", c.h},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"clip_norm", c.clip_norm},
          {"init_scale", c.init_scale},
          {"seed", c.seed},
          {"use_hashtags", c.flags.use_hashtags},
          {"use_source", c.flags.use_source}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.d = j.value("d", c.d);
  c.d_s = j.value("d_s", c.d_s);
  c.h = j.value("h", c.h);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.seed = j.value("seed", c.seed);
  c.flags.use_hashtags = j.value("use_hashtags", c.flags.use_hashtags);
  c.flags.use_source = j.value("use_source", c.flags.use_source);
  return c;
}

#define EMOJIPRED_INSTANTIATE(T)                                                              \
  template struct BiLstmParams<T>;                                                            \
  template BiLstmParams<T> init_params<T>(const BiLstmDims&, const FeatureFlags&,             \
                                          std::uint64_t, double);                             \
  template std::vector<T> softmax<T>(const std::vector<T>&);                                  \
  template T cross_entropy<T>(const std::vector<T>&, ClassId);                                \
  template ForwardCache<T> forward<T>(const BiLstmParams<T>&, const EncodedExample&);         \
  template std::vector<ForwardCache<T>> forward<T>(const BiLstmParams<T>&,                    \
                                                   const std::vector<EncodedExample>&);       \
  template T mean_loss<T>(const std::vector<ForwardCache<T>>&,                                \
                          const std::vector<EncodedExample>&);                                \
  template BiLstmParams<T> backward<T>(const BiLstmParams<T>&,                                \
                                       const std::vector<ForwardCache<T>>&,                   \
                                       const std::vector<EncodedExample>&,                    \
                                       const BackwardOptions&);                               \
  template Prediction predict<T>(const BiLstmParams<T>&, const EncodedExample&);

EMOJIPRED_INSTANTIATE(float)
EMOJIPRED_INSTANTIATE(double)

#undef EMOJIPRED_INSTANTIATE

}  // namespace emojipred
