#include "probe/checkpoint.hpp"

#include <bit>
#include <cstdint>

#include "error.hpp"
#include "fsutil.hpp"
#include "ingest/text.hpp"

namespace orthoprobe::probe {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  return v;
}

template <typename Derived>
void put_block(std::string& data, const Eigen::DenseBase<Derived>& m) {
  // Row-major on disk.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_u64(data, std::bit_cast<std::uint64_t>(double(m(r, c))));
}

Eigen::MatrixXd get_block(std::string_view data, std::size_t offset, Eigen::Index rows, Eigen::Index cols) {
  const std::size_t need = std::size_t(rows) * std::size_t(cols) * 8;
  if (offset > data.size() || data.size() - offset < need) throw FormatError("checkpoint block out of range");
  Eigen::MatrixXd m(rows, cols);
  std::size_t pos = offset;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = std::bit_cast<double>(get_u64(data, pos));
      pos += 8;
    }
  }
  return m;
}

}  // namespace

std::string encode_checkpoint(const ProbeModel& model, const nlohmann::json& extra) {
  using nlohmann::json;
  std::string data;
  json blocks = json::array();
  for (std::size_t i = 0; i < model.maps().size(); ++i) {
    const auto& m = model.maps()[i];
    const std::string lang = model.regime() == Regime::AllLangs ? "*" : model.languages()[i];
    blocks.push_back({{"kind", "map"},
                      {"language", lang},
                      {"trainable", m.trainable},
                      {"rows", m.matrix.rows()},
                      {"cols", m.matrix.cols()},
                      {"offset", data.size()}});
    put_block(data, m.matrix);
  }
  for (const auto& s : model.scalers()) {
    blocks.push_back({{"kind", "scaler"},
                      {"task", std::string(to_string(s.task))},
                      {"language", s.language ? *s.language : "*"},
                      {"rows", s.values.size()},
                      {"cols", 1},
                      {"offset", data.size()}});
    put_block(data, s.values);
  }

  json manifest = extra.is_object() ? extra : json::object();
  manifest["format"] = "orthoprobe-checkpoint";
  manifest["version"] = 1;
  manifest["regime"] = std::string(to_string(model.regime()));
  manifest["languages"] = model.languages();
  json tasks = json::array();
  for (Task t : model.tasks()) tasks.push_back(std::string(to_string(t)));
  manifest["tasks"] = tasks;
  manifest["dim"] = model.dim();
  manifest["layers"] = {{"dependency", model.layers().dependency}, {"lexical", model.layers().lexical}};
  manifest["anchor"] = model.regime() == Regime::MappedLangs ? json(model.anchor()) : json(nullptr);
  manifest["trainable_parameters"] = model.trainable_parameter_count();
  manifest["blocks"] = blocks;

  const std::string text = manifest.dump();
  std::string out(kCheckpointMagic);
  put_u64(out, text.size());
  out += text;
  while (out.size() % 8 != 0) out.push_back('\0');
  out += data;
  return out;
}

LoadedCheckpoint decode_checkpoint(std::string_view bytes) {
  using nlohmann::json;
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic)
    throw FormatError("bad magic: not an orthoprobe checkpoint");
  std::size_t pos = kCheckpointMagic.size();
  if (bytes.size() < pos + 8) throw FormatError("truncated checkpoint");
  const std::uint64_t len = get_u64(bytes, pos);
  pos += 8;
  if (bytes.size() - pos < len) throw FormatError("truncated checkpoint manifest");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(pos, len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid checkpoint manifest: ") + e.what());
  }
  pos += len;
  while (pos % 8 != 0) ++pos;
  if (pos > bytes.size()) throw FormatError("truncated checkpoint");
  const std::string_view data = bytes.substr(pos);

  try {
    const Regime regime = parse_regime(manifest.at("regime").get<std::string>());
    auto languages = manifest.at("languages").get<std::vector<std::string>>();
    const int dim = manifest.at("dim").get<int>();
    std::vector<Task> tasks;
    for (const auto& t : manifest.at("tasks")) tasks.push_back(parse_task(t.get<std::string>()));
    LayerChoice layers{manifest.at("layers").at("dependency").get<int>(), manifest.at("layers").at("lexical").get<int>()};
    std::vector<OrthogonalMap> maps;
    std::vector<ScalingVector> scalers;
    for (const auto& b : manifest.at("blocks")) {
      const auto kind = b.at("kind").get<std::string>();
      const auto rows = b.at("rows").get<Eigen::Index>();
      const auto cols = b.at("cols").get<Eigen::Index>();
      auto block = get_block(data, b.at("offset").get<std::size_t>(), rows, cols);
      if (kind == "map") {
        maps.push_back({std::move(block), b.at("trainable").get<bool>()});
      } else if (kind == "scaler") {
        const auto lang = b.at("language").get<std::string>();
        scalers.push_back({parse_task(b.at("task").get<std::string>()),
                           lang == "*" ? std::nullopt : std::optional<std::string>(lang), block.col(0)});
      } else {
        throw FormatError("unknown checkpoint block kind '" + kind + "'");
      }
    }
    ProbeModel model(regime, std::move(languages), dim, std::move(tasks), layers, std::move(maps), std::move(scalers));
    return {std::move(model), std::move(manifest)};
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid checkpoint manifest: ") + e.what());
  } catch (const ContractError& e) {
    throw FormatError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ProbeModel& model, const std::string& path, const nlohmann::json& extra) {
  write_file_atomic(path, encode_checkpoint(model, extra));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  try {
    return decode_checkpoint(ingest::read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace orthoprobe::probe
