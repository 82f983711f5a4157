#include "zpr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace zpr {

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

namespace {

using json = nlohmann::ordered_json;
constexpr char kMagic[8] = {'Z', 'P', 'R', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw CheckpointError("checkpoint truncated");
  std::uint64_t v;
  std::memcpy(&v, in.data() + pos, 8);
  pos += 8;
  return v;
}

void put_tensor(std::string& out, const Tensor& t) {
  put_u64(out, t.size() * sizeof(double));
  out.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
}

void get_tensor(const std::string& in, std::size_t& pos, Tensor& t, const std::string& name) {
  const std::uint64_t len = get_u64(in, pos);
  if (len != t.size() * sizeof(double)) throw CheckpointError("checkpoint section size mismatch for " + name);
  if (pos + len > in.size()) throw CheckpointError("checkpoint truncated in " + name);
  std::memcpy(t.data(), in.data() + pos, len);
  pos += len;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes, std::size_t len) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(bytes[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const ModelConfig& c = ckpt.model.config();
  json tensors = json::array();
  for (const auto& p : ckpt.model.params()) {
    tensors.push_back({{"name", p.name}, {"rank", p.value.rank()}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
  }
  const json header{{"format_version", kCheckpointFormatVersion},
                    {"feature_version", ckpt.feature_version},
                    {"score_index_corefer", 0},
                    {"dims",
                     {{"vocab_size", c.vocab_size},
                      {"d_emb", c.d_emb},
                      {"d_hidden", c.d_hidden},
                      {"hidden1", c.hidden1},
                      {"hidden2", c.hidden2},
                      {"n_features", c.n_features}}},
                    {"vocabulary", ckpt.vocabulary.tokens()},
                    {"phase", to_string(ckpt.phase)},
                    {"epoch", ckpt.epoch},
                    {"param_version", ckpt.model.params().version()},
                    {"rng_state", ckpt.rng.serialize()},
                    {"tensors", tensors}};
  const std::string h = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, h.size());
  out += h;
  for (const auto& p : ckpt.model.params()) {
    put_tensor(out, p.value);
    put_tensor(out, p.accum);
  }
  put_u64(out, fnv1a64(out, out.size()));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  std::size_t tail = bytes.size() - 8;
  const std::uint64_t stored = get_u64(bytes, tail);
  if (stored != fnv1a64(bytes, bytes.size() - 8)) throw ChecksumError("checkpoint checksum mismatch (file corrupted)");

  std::size_t pos = sizeof(kMagic);
  const std::uint64_t hlen = get_u64(bytes, pos);
  if (pos + hlen > bytes.size() - 8) throw CheckpointError("checkpoint header truncated");
  json header;
  try {
    header = json::parse(bytes.substr(pos, hlen));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  }
  pos += hlen;

  Checkpoint ckpt;
  try {
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw CheckpointError("unsupported checkpoint format version " + header.at("format_version").dump());
    }
    ckpt.feature_version = header.at("feature_version").get<std::string>();
    if (ckpt.feature_version != kFeatureVersion) {
      throw FeatureVersionError("checkpoint feature list '" + ckpt.feature_version + "' does not match this build ('" +
                                std::string(kFeatureVersion) + "'); retrain or use a matching build");
    }
    if (header.at("score_index_corefer").get<int>() != 0) throw CheckpointError("unsupported score index convention");
    const auto& d = header.at("dims");
    ModelConfig c;
    c.vocab_size = d.at("vocab_size").get<std::size_t>();
    c.d_emb = d.at("d_emb").get<std::size_t>();
    c.d_hidden = d.at("d_hidden").get<std::size_t>();
    c.hidden1 = d.at("hidden1").get<std::size_t>();
    c.hidden2 = d.at("hidden2").get<std::size_t>();
    c.n_features = d.at("n_features").get<std::size_t>();
    ckpt.model = Model(c);
    ckpt.vocabulary = Vocabulary(header.at("vocabulary").get<std::vector<std::string>>());
    if (ckpt.vocabulary.size() != c.vocab_size) throw CheckpointError("vocabulary size disagrees with dimensions");
    ckpt.phase = header.at("phase").get<std::string>() == "rl" ? Phase::kRl : Phase::kPretrain;
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.rng = RngStream::deserialize(header.at("rng_state").get<std::string>());
    const auto& tensors = header.at("tensors");
    auto& store = ckpt.model.params();
    if (tensors.size() != store.size()) throw CheckpointError("checkpoint tensor count mismatch");
    for (std::size_t i = 0; i < store.size(); ++i) {
      const auto& tj = tensors[i];
      auto& p = store[i];
      if (tj.at("name").get<std::string>() != p.name || tj.at("rows").get<std::size_t>() != p.value.rows() ||
          tj.at("cols").get<std::size_t>() != p.value.cols()) {
        throw CheckpointError("checkpoint tensor layout mismatch at " + p.name);
      }
      get_tensor(bytes, pos, p.value, p.name);
      get_tensor(bytes, pos, p.accum, p.name);
    }
    store.set_version(header.at("param_version").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  }
  if (pos != bytes.size() - 8) throw CheckpointError("trailing bytes in checkpoint");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace zpr
