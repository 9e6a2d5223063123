#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smoothreg/errors.hpp"
#include "smoothreg/models.hpp"

namespace smoothreg {

namespace {

constexpr int kFormatVersion = 1;

using json = nlohmann::json;

json matrix(const std::vector<double>& flat, std::size_t begin, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto first = flat.begin() + static_cast<std::ptrdiff_t>(begin + r * cols);
    out.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(cols)));
  }
  return out;
}

json vec(const std::vector<double>& flat, std::size_t begin, std::size_t n) {
  const auto first = flat.begin() + static_cast<std::ptrdiff_t>(begin);
  return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n));
}

void read_block(const json& node, std::vector<double>& flat, std::size_t begin, std::size_t rows,
                std::size_t cols, const char* name) {
  std::size_t at = begin;
  auto take = [&](const json& values) {
    if (!values.is_array() || values.size() != cols) {
      throw InputError(std::string("model parameter block '") + name + "' has the wrong shape");
    }
    for (const auto& v : values) flat[at++] = v.get<double>();
  };
  if (rows == 0) {
    take(node);
    return;
  }
  if (!node.is_array() || node.size() != rows) {
    throw InputError(std::string("model parameter block '") + name + "' has the wrong number of rows");
  }
  for (const auto& row : node) take(row);
}

}  // namespace

std::string model_to_json(const NeuralLM& model) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["architecture"] = model.architecture();
  doc["order"] = model.order();
  doc["vocabulary"] = model.vocab().symbols();
  const auto& p = model.parameters();
  const std::size_t k = model.outcome_count();
  if (const auto* tab = dynamic_cast<const TabularSoftmaxLM*>(&model)) {
    json histories = json::array();
    for (const auto& [h, off] : tab->offsets()) histories.push_back(model.vocab().render_history(h));
    doc["dims"] = {{"outcomes", k}, {"histories", tab->offsets().size()}};
    doc["params"] = {{"histories", histories}, {"logits", matrix(p, 0, tab->offsets().size(), k)}};
  } else if (const auto* ff = dynamic_cast<const FeedForwardLM*>(&model)) {
    const auto d = static_cast<std::size_t>(ff->embed_dim());
    const auto hd = static_cast<std::size_t>(ff->hidden_dim());
    const auto& b = ff->blocks();
    doc["dims"] = {{"embed_dim", d}, {"hidden_dim", hd}, {"outcomes", k}};
    doc["params"] = {
        {"E", matrix(p, b.embed, ff->input_rows(), d)},
        {"W1", matrix(p, b.w1, static_cast<std::size_t>(model.order() - 1) * d, hd)},
        {"b1", vec(p, b.b1, hd)},
        {"W2", matrix(p, b.w2, hd, k)},
        {"b2", vec(p, b.b2, k)},
    };
  } else {
    throw InternalError("cannot serialise architecture '" + model.architecture() + "'");
  }
  return doc.dump(1) + "\n";
}

std::unique_ptr<NeuralLM> model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError("cannot parse model file: " + std::string(e.what()));
  }
  try {
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw InputError("unsupported model format_version " + doc.at("format_version").dump());
    }
    auto vocab = std::make_shared<const Vocabulary>(doc.at("vocabulary").get<std::vector<std::string>>());
    const int order = doc.at("order").get<int>();
    const std::string arch = doc.at("architecture").get<std::string>();
    const auto& params = doc.at("params");
    const std::size_t k = vocab->outcome_count();
    if (arch == "tabular") {
      std::vector<History> histories;
      for (const auto& h : params.at("histories")) histories.push_back(vocab->parse_history(h.get<std::string>()));
      auto model = std::make_unique<TabularSoftmaxLM>(order, vocab, histories);
      if (model->offsets().size() != histories.size()) throw InputError("model lists a history twice");
      // Offsets follow map order, which is also the order histories were written in.
      read_block(params.at("logits"), model->parameters(), 0, histories.size(), k, "logits");
      return model;
    }
    if (arch == "feedforward") {
      const auto& dims = doc.at("dims");
      const int d = dims.at("embed_dim").get<int>();
      const int hd = dims.at("hidden_dim").get<int>();
      auto model = std::make_unique<FeedForwardLM>(order, vocab, d, hd);
      const auto& b = model->blocks();
      auto& p = model->parameters();
      const auto du = static_cast<std::size_t>(d);
      const auto hu = static_cast<std::size_t>(hd);
      read_block(params.at("E"), p, b.embed, model->input_rows(), du, "E");
      read_block(params.at("W1"), p, b.w1, static_cast<std::size_t>(order - 1) * du, hu, "W1");
      read_block(params.at("b1"), p, b.b1, 0, hu, "b1");
      read_block(params.at("W2"), p, b.w2, hu, k, "W2");
      read_block(params.at("b2"), p, b.b2, 0, k, "b2");
      return model;
    }
    throw InputError("unknown model architecture '" + arch + "'");
  } catch (const json::exception& e) {
    throw InputError("malformed model file: " + std::string(e.what()));
  }
}

void save_model(const NeuralLM& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file " + path);
  out << model_to_json(model);
  if (!out) throw InputError("failed writing model file " + path);
}

std::unique_ptr<NeuralLM> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace smoothreg
