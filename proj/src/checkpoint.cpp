#include "g2s/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace g2s {

namespace {

constexpr char kMagic[8] = {'G', '2', 'S', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CheckpointError("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

nlohmann::json vocab_json(const Vocab& v) { return v.non_special(); }

Vocab vocab_from_json(const nlohmann::json& j) { return Vocab::from_tokens(j.get<std::vector<std::string>>()); }

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const TrainConfig& config,
                     const nlohmann::json& meta) {
  nlohmann::json header;
  TrainConfig stored = config;
  stored.model = model.config();
  header["config"] = to_json(stored);
  header["vocab"] = {{"words", vocab_json(model.vocabs().words)},
                     {"labels", vocab_json(model.vocabs().labels)},
                     {"chars", vocab_json(model.vocabs().chars)}};
  header["meta"] = meta;
  nlohmann::json params = nlohmann::json::array();
  for (const Parameter* p : model.params().all())
    params.push_back({{"name", p->name()}, {"rows", p->value().rows()}, {"cols", p->value().cols()}});
  header["parameters"] = params;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  for (const Parameter* p : model.params().all()) {
    const Matrix& v = p->value();
    out.append(reinterpret_cast<const char*>(v.data()), static_cast<std::size_t>(v.size()) * sizeof(double));
  }
  put<std::uint64_t>(out, fnv1a(out));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot write '" + tmp + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("failed writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path + "'");
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (in.size() < sizeof(kMagic) + 4 + 8 + 8 || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("'" + path + "' is not a checkpoint");
  const std::size_t body = in.size() - sizeof(std::uint64_t);
  std::size_t tail = body;
  if (take<std::uint64_t>(in, tail) != fnv1a(in.substr(0, body)))
    throw CheckpointError("checkpoint '" + path + "' is corrupted (checksum mismatch)");

  std::size_t pos = sizeof(kMagic);
  const auto version = take<std::uint32_t>(in, pos);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto header_size = take<std::uint64_t>(in, pos);
  if (header_size > body - pos) throw CheckpointError("checkpoint header truncated");

  LoadedCheckpoint out;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.substr(pos, header_size));
    pos += header_size;
    out.config = train_config_from_json(header.at("config"));
    out.meta = header.value("meta", nlohmann::json::object());
    ModelVocabs vocabs{vocab_from_json(header.at("vocab").at("words")),
                       vocab_from_json(header.at("vocab").at("labels")),
                       vocab_from_json(header.at("vocab").at("chars"))};
    EmbeddingTable table{Matrix::Zero(out.config.model.word_dim, vocabs.words.size()), 0};
    out.model = std::make_unique<Model>(out.config.model, std::move(vocabs), table, 0);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  }

  const auto& listed = header.at("parameters");
  auto params = out.model->params().all();
  if (listed.size() != params.size())
    throw CheckpointError("checkpoint lists " + std::to_string(listed.size()) + " parameters, model has " +
                          std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter* p = params[k];
    const auto& entry = listed[k];
    const auto rows = entry.at("rows").get<Index>();
    const auto cols = entry.at("cols").get<Index>();
    if (entry.at("name").get<std::string>() != p->name() || rows != p->value().rows() ||
        cols != p->value().cols())
      throw CheckpointError("checkpoint parameter '" + entry.at("name").get<std::string>() + "' [" +
                            std::to_string(rows) + "x" + std::to_string(cols) + "] does not match '" +
                            p->name() + "' " + shape_str(p->value()));
    const std::size_t bytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (pos + bytes > body) throw CheckpointError("checkpoint tensor data truncated");
    std::memcpy(p->value().data(), in.data() + pos, bytes);
    pos += bytes;
  }
  if (pos != body) throw CheckpointError("checkpoint has trailing bytes");
  return out;
}

}  // namespace g2s
