#pragma once

// Model bundle (weights + vocabularies + direction) and its binary checkpoint:
//
//   "SGDICT" | u32 format version | u64 header length | UTF-8 JSON header |
//   little-endian float64 weights in manifest order
//
// All integers little-endian. The header carries the model config, both
// vocabularies, the tensor manifest, training metadata and an FNV-1a hash of
// the weight bytes.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mundartlex/error.hpp"
#include "mundartlex/fileio.hpp"
#include "mundartlex/text.hpp"
#include "mundartlex/train.hpp"
#include "mundartlex/transformer.hpp"
#include "mundartlex/vocab.hpp"

namespace mundartlex {

inline constexpr std::string_view checkpoint_magic = "SGDICT";
inline constexpr std::uint32_t checkpoint_version = 1;

struct TrainingMetadata {
    int epochs_run = 0;
    int batch_size = 0;
    double dropout = 0.0;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    std::size_t steps = 0;
    std::vector<double> loss_history;
    nlohmann::json extra = nlohmann::json::object();  // split sizes, schedule, ...

    friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

/// A trained p2g or g2p model with everything needed to run it.
struct Seq2SeqModel {
    Direction direction = Direction::p2g;
    Vocab src_vocab;
    Vocab tgt_vocab;
    Transformer<double> net;
    TrainingMetadata training;

    /// Same constructor for both directions; only the vocabularies differ.
    Seq2SeqModel(Direction dir, Vocab src, Vocab tgt, const ModelConfig& cfg)
        : direction(dir), src_vocab(std::move(src)), tgt_vocab(std::move(tgt)),
          net(cfg, src_vocab.size(), tgt_vocab.size()) {}
};

namespace detail {

inline std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <class U>
void put_le(std::string& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

template <class U>
U get_le(std::string_view in, std::size_t pos) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        v |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return v;
}

inline nlohmann::json config_to_json(const ModelConfig& c) {
    return {{"n_layers", c.n_layers}, {"n_heads", c.n_heads},       {"d_k", c.d_k},
            {"d_v", c.d_v},           {"d_model", c.d_model},       {"d_word_vec", c.d_word_vec},
            {"d_inner_hid", c.d_inner_hid}, {"dropout", c.dropout}, {"max_len", c.max_len}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_k = j.at("d_k").get<int>();
    c.d_v = j.at("d_v").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_word_vec = j.at("d_word_vec").get<int>();
    c.d_inner_hid = j.at("d_inner_hid").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.max_len = j.at("max_len").get<int>();
    return c;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Seq2SeqModel& m) {
    const auto& w = m.net.parameters();
    std::string weights;
    weights.reserve(w.size() * 8);
    for (double v : w) detail::put_le(weights, std::bit_cast<std::uint64_t>(v));

    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& t : m.net.manifest()) tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
    const nlohmann::json header = {
        {"direction", std::string(direction_name(m.direction))},
        {"config", detail::config_to_json(m.net.config())},
        {"src_vocab", m.src_vocab.regular_tokens()},
        {"tgt_vocab", m.tgt_vocab.regular_tokens()},
        {"tensors", tensors},
        {"training",
         {{"epochs_run", m.training.epochs_run},
          {"batch_size", m.training.batch_size},
          {"dropout", m.training.dropout},
          {"seed", m.training.seed},
          {"final_loss", m.training.final_loss},
          {"steps", m.training.steps},
          {"loss_history", m.training.loss_history},
          {"extra", m.training.extra}}},
        {"weights_fnv1a64",
         detail::fnv1a(reinterpret_cast<const unsigned char*>(weights.data()), weights.size())},
    };
    const std::string head = header.dump();

    std::string out{checkpoint_magic};
    detail::put_le<std::uint32_t>(out, checkpoint_version);
    detail::put_le<std::uint64_t>(out, head.size());
    out += head;
    out += weights;
    return out;
}

/// Parses a checkpoint image. Any inconsistency throws before a model exists.
inline Seq2SeqModel deserialize_checkpoint(std::string_view bytes) {
    auto corrupt = [](const std::string& why) { return ParseError("corrupt checkpoint: " + why); };
    const std::size_t fixed = checkpoint_magic.size() + 4 + 8;
    if (bytes.size() < fixed) throw corrupt("file too short");
    if (bytes.substr(0, checkpoint_magic.size()) != checkpoint_magic) throw corrupt("bad magic");
    const auto version = detail::get_le<std::uint32_t>(bytes, checkpoint_magic.size());
    if (version != checkpoint_version)
        throw ValidationError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                              std::to_string(checkpoint_version) + ")");
    const auto head_len = detail::get_le<std::uint64_t>(bytes, checkpoint_magic.size() + 4);
    if (head_len > bytes.size() - fixed) throw corrupt("header length exceeds file size");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(fixed, head_len));
    } catch (const nlohmann::json::exception& e) {
        throw corrupt(std::string("header is not valid JSON: ") + e.what());
    }

    try {
        const Direction dir = parse_direction(header.at("direction").get<std::string>());
        Seq2SeqModel m(dir, Vocab(header.at("src_vocab").get<std::vector<std::string>>()),
                       Vocab(header.at("tgt_vocab").get<std::vector<std::string>>()),
                       detail::config_from_json(header.at("config")));

        const auto& tensors = header.at("tensors");
        const auto& manifest = m.net.manifest();
        if (tensors.size() != manifest.size()) throw corrupt("tensor count does not match the model config");
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            const auto shape = tensors[i].at("shape").get<std::vector<std::size_t>>();
            if (tensors[i].at("name").get<std::string>() != manifest[i].name || shape.size() != 2 ||
                shape[0] != manifest[i].rows || shape[1] != manifest[i].cols)
                throw corrupt("tensor " + manifest[i].name + " does not match the model config");
        }

        const std::string_view weights = bytes.substr(fixed + head_len);
        if (weights.size() != m.net.parameter_count() * 8)
            throw corrupt("expected " + std::to_string(m.net.parameter_count() * 8) + " weight bytes, found " +
                          std::to_string(weights.size()));
        if (detail::fnv1a(reinterpret_cast<const unsigned char*>(weights.data()), weights.size()) !=
            header.at("weights_fnv1a64").get<std::uint64_t>())
            throw corrupt("weight checksum mismatch");
        auto& params = m.net.parameters();
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(weights, i * 8));

        const auto& t = header.at("training");
        m.training.epochs_run = t.at("epochs_run").get<int>();
        m.training.batch_size = t.at("batch_size").get<int>();
        m.training.dropout = t.at("dropout").get<double>();
        m.training.seed = t.at("seed").get<std::uint64_t>();
        m.training.final_loss = t.at("final_loss").get<double>();
        m.training.steps = t.at("steps").get<std::size_t>();
        m.training.loss_history = t.at("loss_history").get<std::vector<double>>();
        m.training.extra = t.value("extra", nlohmann::json::object());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw corrupt(std::string("header field error: ") + e.what());
    }
}

inline void save_checkpoint(const Seq2SeqModel& m, const std::string& path) {
    write_file_atomic(path, serialize_checkpoint(m));
}

inline Seq2SeqModel load_checkpoint(const std::string& path) { return deserialize_checkpoint(text::read_file(path)); }

}  // namespace mundartlex
