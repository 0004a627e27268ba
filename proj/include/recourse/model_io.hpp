#ifndef RECOURSE_MODEL_IO_HPP
#define RECOURSE_MODEL_IO_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "recourse/autoencoder.hpp"
#include "recourse/models.hpp"

namespace recourse {

inline constexpr int kModelFormatVersion = 1;

void save_model(const Model& m, const std::string& path);
/// Throws ParseError on malformed input, SchemaError on a version mismatch and
/// UnsupportedKindError for unknown `kind` tags. Never returns a partially built model.
ModelPtr load_model(const std::string& path);
ModelPtr model_from_json(const nlohmann::json& j);

void save_autoencoder(const Autoencoder& ae, const std::string& path);
AutoencoderPtr load_autoencoder(const std::string& path);
Autoencoder autoencoder_from_json(const nlohmann::json& j);

}  // namespace recourse

#endif  // RECOURSE_MODEL_IO_HPP
