#include "rsf/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rsf/error.hpp"

namespace rsf {

static_assert(std::endian::native == std::endian::little, "model container assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'R', 'S', 'F', 'M'};
constexpr std::uint32_t kTagValue = 0x554c4156;    // "VALU"
constexpr std::uint32_t kTagNominal = 0x4d4f4e50;  // "PNOM"
constexpr std::uint32_t kTagSafe = 0x45464153;     // "SAFE"

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_bytes(const std::string& bytes) { out_ += bytes; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw IoError("model file truncated");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_bytes(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError("model file truncated");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string encode_value(const ValueModel& model) {
  Writer w;
  const auto sizes = model.layer_sizes();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sizes.size()));
  for (std::size_t s : sizes) w.put<std::uint32_t>(static_cast<std::uint32_t>(s));
  const auto& meta = model.metadata();
  w.put<double>(meta.gamma);
  w.put<std::uint64_t>(meta.horizon);
  w.put<std::uint64_t>(meta.train_seed);
  w.put<double>(meta.train_mse);
  const auto& norm = model.normalization();
  for (Eigen::Index k = 0; k < norm.input_mean.size(); ++k) w.put<double>(norm.input_mean(k));
  for (Eigen::Index k = 0; k < norm.input_scale.size(); ++k) w.put<double>(norm.input_scale(k));
  w.put<double>(norm.target_mean);
  w.put<double>(norm.target_scale);
  for (const auto& layer : model.layers()) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) w.put<double>(layer.weights(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) w.put<double>(layer.bias(r));
  }
  return w.take();
}

ValueModel decode_value(const std::string& bytes) {
  Reader r(bytes);
  const auto count = r.get<std::uint32_t>();
  if (count < 2 || count > 64) throw IoError("value model: implausible layer count");
  std::vector<Eigen::Index> sizes(count);
  for (auto& s : sizes) {
    s = r.get<std::uint32_t>();
    if (s == 0 || s > (1u << 16)) throw IoError("value model: implausible layer size");
  }
  ValueModel::Metadata meta;
  meta.gamma = r.get<double>();
  meta.horizon = r.get<std::uint64_t>();
  meta.train_seed = r.get<std::uint64_t>();
  meta.train_mse = r.get<double>();
  ValueModel::Normalization norm;
  norm.input_mean.resize(sizes[0]);
  norm.input_scale.resize(sizes[0]);
  for (Eigen::Index k = 0; k < sizes[0]; ++k) norm.input_mean(k) = r.get<double>();
  for (Eigen::Index k = 0; k < sizes[0]; ++k) norm.input_scale(k) = r.get<double>();
  norm.target_mean = r.get<double>();
  norm.target_scale = r.get<double>();
  std::vector<DenseLayer> layers(count - 1);
  for (std::size_t l = 0; l + 1 < count; ++l) {
    layers[l].weights.resize(sizes[l + 1], sizes[l]);
    layers[l].bias.resize(sizes[l + 1]);
    for (Eigen::Index row = 0; row < sizes[l + 1]; ++row)
      for (Eigen::Index col = 0; col < sizes[l]; ++col) layers[l].weights(row, col) = r.get<double>();
    for (Eigen::Index row = 0; row < sizes[l + 1]; ++row) layers[l].bias(row) = r.get<double>();
  }
  if (!r.done()) throw IoError("value model: trailing bytes");
  try {
    return ValueModel(std::move(layers), std::move(norm), meta);
  } catch (const ContractError& e) {
    throw IoError(std::string("value model: ") + e.what());
  }
}

std::string encode_policy(const Policy& p) {
  Writer w;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.kind));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.action_dims.size()));
  for (std::size_t i = 0; i < p.action_dims.size(); ++i) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.action_dims[i]));
    w.put<double>(p.gains[i].kp);
    w.put<double>(p.gains[i].kd);
    w.put<double>(p.gains[i].v_ref);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.reference.size()));
  for (double v : p.reference) w.put<double>(v);
  w.put<double>(p.box.lower);
  w.put<double>(p.box.upper);
  return w.take();
}

Policy decode_policy(const std::string& bytes) {
  Reader r(bytes);
  Policy p;
  const auto kind = r.get<std::uint32_t>();
  if (kind > static_cast<std::uint32_t>(PolicyKind::Improved)) throw IoError("policy: unknown kind");
  p.kind = static_cast<PolicyKind>(kind);
  const auto agents = r.get<std::uint32_t>();
  if (agents > 4096) throw IoError("policy: implausible agent count");
  p.action_dims.resize(agents);
  p.gains.resize(agents);
  for (std::uint32_t i = 0; i < agents; ++i) {
    p.action_dims[i] = r.get<std::uint32_t>();
    p.gains[i].kp = r.get<double>();
    p.gains[i].kd = r.get<double>();
    p.gains[i].v_ref = r.get<double>();
  }
  const auto ref = r.get<std::uint32_t>();
  if (ref > 4096) throw IoError("policy: implausible reference size");
  p.reference.resize(ref);
  for (auto& v : p.reference) v = r.get<double>();
  p.box.lower = r.get<double>();
  p.box.upper = r.get<double>();
  if (!r.done()) throw IoError("policy: trailing bytes");
  return p;
}

}  // namespace

std::string encode_bundle(const ModelBundle& bundle) {
  Writer w;
  w.put_bytes(std::string(kMagic, 4));
  w.put<std::uint32_t>(kModelFormatVersion);
  std::vector<std::pair<std::uint32_t, std::string>> sections;
  sections.emplace_back(kTagValue, encode_value(bundle.value));
  if (bundle.nominal) sections.emplace_back(kTagNominal, encode_policy(*bundle.nominal));
  if (bundle.safe) sections.emplace_back(kTagSafe, encode_policy(*bundle.safe));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [tag, payload] : sections) {
    w.put<std::uint32_t>(tag);
    w.put<std::uint64_t>(payload.size());
    w.put_bytes(payload);
  }
  return w.take();
}

ModelBundle decode_bundle(const std::string& bytes) {
  Reader r(bytes);
  if (r.get_bytes(4) != std::string(kMagic, 4)) throw IoError("not a model container (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw IoError("unsupported model container version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  std::optional<ValueModel> value;
  ModelBundle bundle;
  for (std::uint32_t s = 0; s < count; ++s) {
    const auto tag = r.get<std::uint32_t>();
    const auto length = r.get<std::uint64_t>();
    const std::string payload = r.get_bytes(static_cast<std::size_t>(length));
    switch (tag) {
      case kTagValue: value = decode_value(payload); break;
      case kTagNominal: bundle.nominal = decode_policy(payload); break;
      case kTagSafe: bundle.safe = decode_policy(payload); break;
      default: break;  // unknown sections are skipped
    }
  }
  if (!r.done()) throw IoError("model container: trailing bytes");
  if (!value) throw IoError("model container has no value section");
  bundle.value = std::move(*value);
  return bundle;
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  const std::string bytes = encode_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw MissingModelError("value model file '" + path.string() + "' not found; run train-value first");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_bundle(buf.str());
}

}  // namespace rsf
