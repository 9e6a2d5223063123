#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "smoothreg/conditional_lm.hpp"
#include "smoothreg/corpus.hpp"

namespace smoothreg {

// Differentiable conditional model q_theta(x | h) over the extended alphabet.
// Parameters live in one flat vector so optimizers and gradient checks can
// treat every architecture alike.
class NeuralLM {
 public:
  NeuralLM(int order, std::shared_ptr<const Vocabulary> vocab);
  virtual ~NeuralLM() = default;

  int order() const { return order_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const { return vocab_; }
  std::size_t outcome_count() const { return vocab_->outcome_count(); }

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // Pre-softmax scores. Throws ShapeError for a history of the wrong length or
  // with ids outside symbols + BOS.
  virtual std::vector<double> logits(const History& history) const = 0;
  // Adds d(loss)/d(theta) to `grad` given d(loss)/d(logits).
  virtual void backward(const History& history, std::span<const double> dlogits,
                        std::span<double> grad) const = 0;

  virtual std::string architecture() const = 0;
  virtual std::unique_ptr<NeuralLM> clone() const = 0;

  std::vector<double> forward(const History& history) const;

  // Tabulates forward() for the given histories; other histories fall back to
  // a uniform distribution.
  ConditionalLM to_conditional(const std::vector<History>& histories) const;

 protected:
  void check_history(const History& history) const;

  int order_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<double> params_;
};

// One free logit vector per known history; unknown histories score all zeros.
class TabularSoftmaxLM : public NeuralLM {
 public:
  TabularSoftmaxLM(int order, std::shared_ptr<const Vocabulary> vocab, const std::vector<History>& histories);

  const std::map<History, std::size_t>& offsets() const { return offsets_; }
  std::vector<History> histories() const;
  // Pointer to the logit block of a known history, nullptr otherwise.
  double* logits_of(const History& history);

  std::vector<double> logits(const History& history) const override;
  void backward(const History& history, std::span<const double> dlogits, std::span<double> grad) const override;
  std::string architecture() const override { return "tabular"; }
  std::unique_ptr<NeuralLM> clone() const override;

 private:
  std::map<History, std::size_t> offsets_;
};

// softmax(W2^T tanh(W1^T [E[h_1]; ...; E[h_{n-1}]] + b1) + b2).
// Layout of the flat vector: E (|Sigma|+1 rows incl. BOS, embed_dim columns),
// W1 ((n-1) embed_dim rows, hidden_dim columns), b1, W2 (hidden_dim rows,
// |Sigma-bar| columns), b2; all row-major.
class FeedForwardLM : public NeuralLM {
 public:
  FeedForwardLM(int order, std::shared_ptr<const Vocabulary> vocab, int embed_dim, int hidden_dim);

  int embed_dim() const { return embed_dim_; }
  int hidden_dim() const { return hidden_dim_; }

  // uniform(-scale, scale) for every parameter.
  void initialize(std::uint64_t seed, double scale = 0.1);

  struct Blocks {
    std::size_t embed, w1, b1, w2, b2, end;
  };
  const Blocks& blocks() const { return blocks_; }
  std::size_t input_rows() const { return vocab_->size() + 1; }

  std::vector<double> logits(const History& history) const override;
  void backward(const History& history, std::span<const double> dlogits, std::span<double> grad) const override;
  std::string architecture() const override { return "feedforward"; }
  std::unique_ptr<NeuralLM> clone() const override;

 private:
  std::vector<double> input(const History& history) const;
  std::vector<double> hidden(std::span<const double> x) const;

  int embed_dim_;
  int hidden_dim_;
  Blocks blocks_{};
};

// JSON document {format_version, architecture, order, vocabulary, dims,
// params}. Doubles are written with round-trip precision.
std::string model_to_json(const NeuralLM& model);
std::unique_ptr<NeuralLM> model_from_json(const std::string& text);
void save_model(const NeuralLM& model, const std::string& path);
std::unique_ptr<NeuralLM> load_model(const std::string& path);

}  // namespace smoothreg
