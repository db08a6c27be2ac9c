#include "ucrl/qnetwork.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "ucrl/errors.hpp"

namespace ucrl {

namespace {

constexpr char kMagic[8] = {'U', 'C', 'R', 'L', 'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_raw(std::ostream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void read_raw(std::istream& in, void* data, std::size_t size) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!in) throw StructuralError("checkpoint is truncated");
}

void write_mlp(std::ostream& out, const Mlp& net) {
  for (const auto& layer : net.layers) {
    write_raw(out, layer.w.data(), sizeof(double) * layer.w.size());
    write_raw(out, layer.b.data(), sizeof(double) * layer.b.size());
  }
}

void read_mlp(std::istream& in, Mlp& net) {
  for (auto& layer : net.layers) {
    read_raw(in, layer.w.data(), sizeof(double) * layer.w.size());
    read_raw(in, layer.b.data(), sizeof(double) * layer.b.size());
  }
}

}  // namespace

Mlp Mlp::glorot(const std::vector<int>& sizes, std::mt19937_64& rng) {
  Mlp net = zeros(sizes);
  for (auto& layer : net.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.w.rows() + layer.w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Column-major fill keeps the draw order tied to the storage layout.
    for (Eigen::Index k = 0; k < layer.w.size(); ++k) layer.w.data()[k] = dist(rng);
  }
  return net;
}

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw StructuralError("network needs at least an input and an output layer");
  if (sizes.back() != 1) throw StructuralError("Q-network output must be scalar");
  Mlp net;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    if (sizes[l - 1] < 1 || sizes[l] < 1) throw StructuralError("layer sizes must be positive");
    net.layers.push_back({Eigen::MatrixXd::Zero(sizes[l], sizes[l - 1]), Eigen::VectorXd::Zero(sizes[l])});
  }
  return net;
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s{input_size()};
  for (const auto& layer : layers) s.push_back(static_cast<int>(layer.w.rows()));
  return s;
}

double Mlp::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_size())
    throw StructuralError("feature length " + std::to_string(x.size()) + " does not match network input " +
                          std::to_string(input_size()));
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = layers[l].w * h + layers[l].b;
    if (l + 1 < layers.size()) h = h.cwiseMax(0.0);
  }
  return h(0);
}

Mlp Mlp::gradient(std::span<const double> x, double* value) const {
  if (static_cast<int>(x.size()) != input_size()) throw StructuralError("feature length does not match network input");
  std::vector<Eigen::VectorXd> acts{Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::VectorXd z = layers[l].w * acts.back() + layers[l].b;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  if (value) *value = acts.back()(0);
  Mlp grad = *this;
  Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);
  for (std::size_t l = layers.size(); l-- > 0;) {
    grad.layers[l].w = delta * acts[l].transpose();
    grad.layers[l].b = delta;
    if (l > 0) {
      delta = layers[l].w.transpose() * delta;
      delta = delta.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return grad;
}

bool Mlp::finite() const {
  for (const auto& layer : layers)
    if (!layer.w.allFinite() || !layer.b.allFinite()) return false;
  return true;
}

bool Mlp::operator==(const Mlp& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& a = layers[l];
    const auto& b = other.layers[l];
    if (a.w.rows() != b.w.rows() || a.w.cols() != b.w.cols() || a.b.size() != b.b.size()) return false;
    if (std::memcmp(a.w.data(), b.w.data(), sizeof(double) * a.w.size()) != 0) return false;
    if (std::memcmp(a.b.data(), b.b.data(), sizeof(double) * a.b.size()) != 0) return false;
  }
  return true;
}

QNetwork::QNetwork(const std::vector<int>& sizes, std::mt19937_64& rng) : QNetwork(Mlp::glorot(sizes, rng)) {}

QNetwork::QNetwork(Mlp online)
    : online_(std::move(online)), target_(online_), m_(Mlp::zeros(online_.sizes())), v_(Mlp::zeros(online_.sizes())) {}

double QNetwork::td_update(std::span<const double> x, double target, double alpha) {
  double q = 0.0;
  const Mlp grad = online_.gradient(x, &q);
  const double err = q - target;
  const double loss = err * err;
  if (!std::isfinite(loss)) throw DivergenceError(-1, "non-finite TD loss");
  ++step_;
  const double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(step_));
  for (std::size_t l = 0; l < online_.layers.size(); ++l) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g_raw) {
      const auto g = (2.0 * err) * g_raw.array();
      m.array() = adam_.beta1 * m.array() + (1.0 - adam_.beta1) * g;
      v.array() = adam_.beta2 * v.array() + (1.0 - adam_.beta2) * g * g;
      param.array() -= alpha * (m.array() / bc1) / ((v.array() / bc2).sqrt() + adam_.epsilon);
    };
    update(online_.layers[l].w, m_.layers[l].w, v_.layers[l].w, grad.layers[l].w);
    update(online_.layers[l].b, m_.layers[l].b, v_.layers[l].b, grad.layers[l].b);
  }
  if (!online_.finite()) throw DivergenceError(-1, "non-finite parameters after update");
  return loss;
}

void QNetwork::save(const std::filesystem::path& path, std::uint64_t fingerprint) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  write_raw(out, kMagic, sizeof kMagic);
  write_raw(out, &kVersion, sizeof kVersion);
  write_raw(out, &fingerprint, sizeof fingerprint);
  const auto sizes = online_.sizes();
  const auto count = static_cast<std::uint32_t>(sizes.size());
  write_raw(out, &count, sizeof count);
  for (int s : sizes) {
    const auto s32 = static_cast<std::int32_t>(s);
    write_raw(out, &s32, sizeof s32);
  }
  write_raw(out, &step_, sizeof step_);
  write_mlp(out, online_);
  write_mlp(out, target_);
  write_mlp(out, m_);
  write_mlp(out, v_);
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

QNetwork QNetwork::load(const std::filesystem::path& path, std::uint64_t* fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  read_raw(in, magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw StructuralError(path.string() + " is not a checkpoint");
  std::uint32_t version = 0;
  read_raw(in, &version, sizeof version);
  if (version != kVersion) throw StructuralError("unsupported checkpoint version " + std::to_string(version));
  std::uint64_t fp = 0;
  read_raw(in, &fp, sizeof fp);
  if (fingerprint) *fingerprint = fp;
  std::uint32_t count = 0;
  read_raw(in, &count, sizeof count);
  if (count < 2 || count > 64) throw StructuralError("implausible layer count in checkpoint");
  std::vector<int> sizes(count);
  for (auto& s : sizes) {
    std::int32_t s32 = 0;
    read_raw(in, &s32, sizeof s32);
    s = s32;
  }
  QNetwork net(Mlp::zeros(sizes));
  read_raw(in, &net.step_, sizeof net.step_);
  read_mlp(in, net.online_);
  read_mlp(in, net.target_);
  read_mlp(in, net.m_);
  read_mlp(in, net.v_);
  return net;
}

bool QNetwork::operator==(const QNetwork& other) const {
  return step_ == other.step_ && online_ == other.online_ && target_ == other.target_ && m_ == other.m_ &&
         v_ == other.v_;
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& text) {
  return fnv1a(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

}  // namespace ucrl
