#include "recourse/model_io.hpp"

#include "recourse/errors.hpp"
#include "recourse/json_util.hpp"
#include "recourse/trees.hpp"

namespace recourse {

namespace {

void check_version(const nlohmann::json& j) {
  const int version = j.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw SchemaError("model format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  }
}

LayerStack stack_from_json(const nlohmann::json& layers) {
  std::vector<DenseLayer> out;
  for (const auto& l : layers) {
    DenseLayer layer;
    layer.W = matrix_from_json(l.at("W"));
    layer.b = vector_from_json(l.at("b"));
    layer.activation = parse_activation(l.value("activation", std::string("identity")));
    layer.dropout = l.value("dropout", 0.0);
    out.push_back(std::move(layer));
  }
  return LayerStack(std::move(out));
}

MlpModel mlp_from_json(const nlohmann::json& j) {
  check_version(j);
  return MlpModel(stack_from_json(j.at("layers")), parse_likelihood(j.at("likelihood").get<std::string>()));
}

nlohmann::json parse_document(const std::string& text, const std::string& path) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("cannot parse '" + path + "': " + e.what());
  }
}

}  // namespace

ModelPtr model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("kind")) throw ParseError("model document lacks a 'kind' tag");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      check_version(j);
      const auto& layer = j.at("layers").at(0);
      return std::make_shared<LinearModel>(matrix_from_json(layer.at("W")), vector_from_json(layer.at("b")),
                                           parse_likelihood(j.at("likelihood").get<std::string>()));
    }
    if (kind == "mlp") return std::make_shared<MlpModel>(mlp_from_json(j));
    if (kind == "ensemble") {
      check_version(j);
      std::vector<MlpModel> members;
      for (const auto& m : j.at("members")) members.push_back(mlp_from_json(m));
      return std::make_shared<DeepEnsemble>(std::move(members));
    }
    if (kind == "tree" || kind == "forest") {
      check_version(j);
      const auto dims = j.at("dims").at("input").get<Eigen::Index>();
      const int classes = j.at("dims").at("classes").get<int>();
      std::vector<DecisionTree> trees;
      for (const auto& t : j.at("trees")) {
        std::vector<TreeNode> nodes;
        for (const auto& n : t.at("nodes")) {
          TreeNode node;
          if (n.contains("probs")) {
            node.class_probs = vector_from_json(n.at("probs"));
          } else {
            node.feature = n.at("feature").get<int>();
            node.threshold = n.at("threshold").get<double>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
          }
          nodes.push_back(std::move(node));
        }
        trees.emplace_back(std::move(nodes), dims, classes);
      }
      const auto vote = j.value("vote", std::string("majority"));
      if (vote != "majority" && vote != "average") throw ParseError("unknown vote rule '" + vote + "'");
      return std::make_shared<TreeModel>(std::move(trees), dims, classes,
                                         vote == "average" ? VoteRule::Average : VoteRule::Majority);
    }
    if (kind == "autoencoder") {
      throw UnsupportedKindError("'autoencoder' documents are not classifiers; load them as an autoencoder");
    }
    throw UnsupportedKindError("unsupported model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const Model& m, const std::string& path) { write_file_atomic(path, m.to_json().dump(1)); }

ModelPtr load_model(const std::string& path) { return model_from_json(parse_document(read_file(path), path)); }

Autoencoder autoencoder_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("kind", std::string()) != "autoencoder") {
      throw UnsupportedKindError("document is not an autoencoder");
    }
    check_version(j);
    return Autoencoder(stack_from_json(j.at("encoder")), stack_from_json(j.at("decoder")));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed autoencoder document: ") + e.what());
  }
}

void save_autoencoder(const Autoencoder& ae, const std::string& path) { write_file_atomic(path, ae.to_json().dump(1)); }

AutoencoderPtr load_autoencoder(const std::string& path) {
  return std::make_shared<Autoencoder>(autoencoder_from_json(parse_document(read_file(path), path)));
}

}  // namespace recourse
