#ifndef SASOFTMAX_CHECKPOINT_HPP
#define SASOFTMAX_CHECKPOINT_HPP

// Checkpoint format (JSON, version 1):
//
//   {
//     "magic": "sasoftmax-checkpoint",
//     "version": 1,
//     "spec": {"kind": "v4", "layers": 2, "d_model": 32, "vocab": 65,
//              "rope_base": 10000.0 | null, "eps": 1e-10},
//     "seq_len": 64,
//     "vocab": [10, 32, 33, ...],                  // byte value of each id
//     "tensors": [{"name": "embedding", "shape": [65, 32], "data": [...]}, ...]
//   }
//
// Tensors appear in ModelParams::named_tensors order, data row-major.
// Doubles are written with round-trip precision.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sasoftmax/corpus.hpp"
#include "sasoftmax/error.hpp"
#include "sasoftmax/io.hpp"
#include "sasoftmax/micro_lm.hpp"

namespace sasoftmax {

inline constexpr const char* kCheckpointMagic = "sasoftmax-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelSpec spec;
  ModelParams params;
  Vocabulary vocab;
  std::size_t seq_len = 0;
};

inline nlohmann::json checkpoint_to_json(const Checkpoint& ck) {
  using nlohmann::json;
  json spec = {{"kind", to_string(ck.spec.kind)},
               {"layers", ck.spec.layers},
               {"d_model", ck.spec.d_model},
               {"vocab", ck.spec.vocab},
               {"eps", ck.spec.eps}};
  spec["rope_base"] = ck.spec.rope_base ? json(*ck.spec.rope_base) : json(nullptr);
  json tensors = json::array();
  for (const auto& [name, m] : ck.params.named_tensors()) {
    tensors.push_back({{"name", name}, {"shape", {m->rows(), m->cols()}}, {"data", m->values()}});
  }
  std::vector<int> symbols(ck.vocab.symbols().begin(), ck.vocab.symbols().end());
  return json{{"magic", kCheckpointMagic}, {"version", kCheckpointVersion}, {"spec", spec},
              {"seq_len", ck.seq_len},     {"vocab", symbols},              {"tensors", tensors}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::IoError, "checkpoint: " + what); };
  try {
    if (j.value("magic", "") != kCheckpointMagic) bad("missing magic header");
    if (j.at("version").get<int>() != kCheckpointVersion) bad("unsupported version");
    Checkpoint ck;
    const auto& s = j.at("spec");
    const auto kind = parse_variant(s.at("kind").get<std::string>());
    if (!kind) bad("unknown kind");
    ck.spec.kind = *kind;
    ck.spec.layers = s.at("layers").get<std::size_t>();
    ck.spec.d_model = s.at("d_model").get<std::size_t>();
    ck.spec.vocab = s.at("vocab").get<std::size_t>();
    ck.spec.eps = s.at("eps").get<double>();
    if (!s.at("rope_base").is_null()) ck.spec.rope_base = s.at("rope_base").get<double>();
    ck.seq_len = j.at("seq_len").get<std::size_t>();

    std::vector<unsigned char> symbols;
    for (int b : j.at("vocab").get<std::vector<int>>()) {
      if (b < 0 || b > 255) bad("vocab entry out of byte range");
      symbols.push_back(static_cast<unsigned char>(b));
    }
    ck.vocab = Vocabulary::from_symbols(symbols);
    if (ck.vocab.size() != ck.spec.vocab) bad("vocab size disagrees with spec");

    ck.params = zero_params(ck.spec);
    auto slots = ck.params.named_tensors();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != slots.size()) bad("tensor count does not match the architecture");
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& t = tensors[i];
      if (t.at("name").get<std::string>() != slots[i].first) bad("unexpected tensor " + slots[i].first);
      const auto shape = t.at("shape").get<std::vector<std::size_t>>();
      Matrix& m = *slots[i].second;
      if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
        bad("shape mismatch for " + slots[i].first);
      }
      const auto data = t.at("data").get<std::vector<double>>();
      if (data.size() != m.size()) bad("data length mismatch for " + slots[i].first);
      std::copy(data.begin(), data.end(), m.data().begin());
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(ck).dump());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, "checkpoint is not valid JSON: " + std::string(e.what()));
  }
  return checkpoint_from_json(j);
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_CHECKPOINT_HPP
