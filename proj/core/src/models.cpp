#include "smoothreg/models.hpp"

#include <algorithm>
#include <cmath>

#include "smoothreg/divergence.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/random.hpp"

namespace smoothreg {

NeuralLM::NeuralLM(int order, std::shared_ptr<const Vocabulary> vocab) : order_(order), vocab_(std::move(vocab)) {
  if (order_ < 1) throw ParameterError("model order must be >= 1, got " + std::to_string(order_));
  if (!vocab_ || vocab_->size() == 0) throw ParameterError("model needs a nonempty vocabulary");
}

void NeuralLM::check_history(const History& history) const {
  if (history.size() != static_cast<std::size_t>(order_ - 1)) {
    throw ShapeError("history of length " + std::to_string(history.size()) + " for order-" +
                     std::to_string(order_) + " model");
  }
  for (SymbolId id : history) {
    if (id < 0 || id > vocab_->bos_id()) throw ShapeError("invalid symbol id " + std::to_string(id) + " in history");
  }
}

std::vector<double> NeuralLM::forward(const History& history) const {
  return softmax(logits(history));
}

ConditionalLM NeuralLM::to_conditional(const std::vector<History>& histories) const {
  ConditionalLM lm(order_, vocab_);
  for (const auto& h : histories) lm.set(h, forward(h));
  lm.set_backstop_uniform();
  lm.method = architecture();
  return lm;
}

// --- tabular ------------------------------------------------------------------

TabularSoftmaxLM::TabularSoftmaxLM(int order, std::shared_ptr<const Vocabulary> vocab,
                                   const std::vector<History>& histories)
    : NeuralLM(order, std::move(vocab)) {
  const std::size_t k = outcome_count();
  for (const auto& h : histories) {
    check_history(h);
    offsets_.emplace(h, 0);
  }
  // Blocks follow map order so the flat vector is independent of input order.
  std::size_t next = 0;
  for (auto& [h, off] : offsets_) {
    off = next;
    next += k;
  }
  params_.assign(next, 0.0);
}

std::vector<History> TabularSoftmaxLM::histories() const {
  std::vector<History> out;
  out.reserve(offsets_.size());
  for (const auto& [h, off] : offsets_) out.push_back(h);
  return out;
}

double* TabularSoftmaxLM::logits_of(const History& history) {
  auto it = offsets_.find(history);
  return it == offsets_.end() ? nullptr : params_.data() + it->second;
}

std::vector<double> TabularSoftmaxLM::logits(const History& history) const {
  check_history(history);
  auto it = offsets_.find(history);
  if (it == offsets_.end()) return std::vector<double>(outcome_count(), 0.0);
  const auto first = params_.begin() + static_cast<std::ptrdiff_t>(it->second);
  return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(outcome_count()));
}

void TabularSoftmaxLM::backward(const History& history, std::span<const double> dlogits,
                                std::span<double> grad) const {
  auto it = offsets_.find(history);
  if (it == offsets_.end()) return;
  for (std::size_t x = 0; x < dlogits.size(); ++x) grad[it->second + x] += dlogits[x];
}

std::unique_ptr<NeuralLM> TabularSoftmaxLM::clone() const {
  return std::make_unique<TabularSoftmaxLM>(*this);
}

// --- feedforward ----------------------------------------------------------------

FeedForwardLM::FeedForwardLM(int order, std::shared_ptr<const Vocabulary> vocab, int embed_dim, int hidden_dim)
    : NeuralLM(order, std::move(vocab)), embed_dim_(embed_dim), hidden_dim_(hidden_dim) {
  if (embed_dim < 1 || hidden_dim < 1) throw ParameterError("embedding and hidden sizes must be positive");
  const auto d = static_cast<std::size_t>(embed_dim);
  const auto hd = static_cast<std::size_t>(hidden_dim);
  const auto ctx = static_cast<std::size_t>(order - 1);
  const std::size_t k = outcome_count();
  blocks_.embed = 0;
  blocks_.w1 = blocks_.embed + input_rows() * d;
  blocks_.b1 = blocks_.w1 + ctx * d * hd;
  blocks_.w2 = blocks_.b1 + hd;
  blocks_.b2 = blocks_.w2 + hd * k;
  blocks_.end = blocks_.b2 + k;
  params_.assign(blocks_.end, 0.0);
}

void FeedForwardLM::initialize(std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (double& p : params_) p = uniform(rng, -scale, scale);
}

std::vector<double> FeedForwardLM::input(const History& history) const {
  const auto d = static_cast<std::size_t>(embed_dim_);
  std::vector<double> x(history.size() * d);
  for (std::size_t pos = 0; pos < history.size(); ++pos) {
    const double* row = params_.data() + blocks_.embed + static_cast<std::size_t>(history[pos]) * d;
    std::copy(row, row + d, x.begin() + static_cast<std::ptrdiff_t>(pos * d));
  }
  return x;
}

std::vector<double> FeedForwardLM::hidden(std::span<const double> x) const {
  const auto hd = static_cast<std::size_t>(hidden_dim_);
  std::vector<double> a(params_.begin() + static_cast<std::ptrdiff_t>(blocks_.b1),
                        params_.begin() + static_cast<std::ptrdiff_t>(blocks_.b1 + hd));
  const double* w1 = params_.data() + blocks_.w1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double* row = w1 + i * hd;
    for (std::size_t j = 0; j < hd; ++j) a[j] += xi * row[j];
  }
  for (double& v : a) v = std::tanh(v);
  return a;
}

std::vector<double> FeedForwardLM::logits(const History& history) const {
  check_history(history);
  const auto hid = hidden(input(history));
  const std::size_t k = outcome_count();
  std::vector<double> z(params_.begin() + static_cast<std::ptrdiff_t>(blocks_.b2),
                        params_.begin() + static_cast<std::ptrdiff_t>(blocks_.b2 + k));
  const double* w2 = params_.data() + blocks_.w2;
  for (std::size_t j = 0; j < hid.size(); ++j) {
    const double hj = hid[j];
    const double* row = w2 + j * k;
    for (std::size_t x = 0; x < k; ++x) z[x] += hj * row[x];
  }
  return z;
}

void FeedForwardLM::backward(const History& history, std::span<const double> dlogits,
                             std::span<double> grad) const {
  const auto d = static_cast<std::size_t>(embed_dim_);
  const auto hd = static_cast<std::size_t>(hidden_dim_);
  const std::size_t k = outcome_count();
  const auto x = input(history);
  const auto hid = hidden(x);

  for (std::size_t o = 0; o < k; ++o) grad[blocks_.b2 + o] += dlogits[o];
  std::vector<double> da(hd, 0.0);
  const double* w2 = params_.data() + blocks_.w2;
  for (std::size_t j = 0; j < hd; ++j) {
    const double* row = w2 + j * k;
    double* grow = grad.data() + blocks_.w2 + j * k;
    double dh = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      grow[o] += hid[j] * dlogits[o];
      dh += row[o] * dlogits[o];
    }
    da[j] = dh * (1.0 - hid[j] * hid[j]);
  }
  for (std::size_t j = 0; j < hd; ++j) grad[blocks_.b1 + j] += da[j];
  const double* w1 = params_.data() + blocks_.w1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double* row = w1 + i * hd;
    double* grow = grad.data() + blocks_.w1 + i * hd;
    double dx = 0.0;
    for (std::size_t j = 0; j < hd; ++j) {
      grow[j] += x[i] * da[j];
      dx += row[j] * da[j];
    }
    const std::size_t pos = i / d;
    const std::size_t e = i % d;
    grad[blocks_.embed + static_cast<std::size_t>(history[pos]) * d + e] += dx;
  }
}

std::unique_ptr<NeuralLM> FeedForwardLM::clone() const {
  return std::make_unique<FeedForwardLM>(*this);
}

}  // namespace smoothreg
