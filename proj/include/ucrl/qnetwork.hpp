#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ucrl {

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

/// Fully connected network, ReLU on hidden layers, identity scalar output.
struct Mlp {
  std::vector<DenseLayer> layers;

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp glorot(const std::vector<int>& sizes, std::mt19937_64& rng);
  static Mlp zeros(const std::vector<int>& sizes);

  std::vector<int> sizes() const;
  int input_size() const { return static_cast<int>(layers.front().w.cols()); }
  double forward(std::span<const double> x) const;
  /// dQ/dparams in the same layout as the network.
  Mlp gradient(std::span<const double> x, double* value = nullptr) const;
  bool finite() const;
  bool operator==(const Mlp& other) const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Online network, target copy and Adam moments.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(const std::vector<int>& sizes, std::mt19937_64& rng);
  explicit QNetwork(Mlp online);

  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  Mlp& online_mut() { return online_; }
  long long adam_steps() const { return step_; }

  double q(std::span<const double> x) const { return online_.forward(x); }
  double q_target(std::span<const double> x) const { return target_.forward(x); }

  /// One Adam step on (Q(x) - target)^2; returns the loss before the step.
  /// Throws DivergenceError(-1, ...) on a non-finite loss or parameters.
  double td_update(std::span<const double> x, double target, double alpha);
  void sync_target() { target_ = online_; }

  void save(const std::filesystem::path& path, std::uint64_t fingerprint) const;
  static QNetwork load(const std::filesystem::path& path, std::uint64_t* fingerprint = nullptr);
  bool operator==(const QNetwork& other) const;

 private:
  Mlp online_;
  Mlp target_;
  Mlp m_;
  Mlp v_;
  long long step_ = 0;
  AdamConfig adam_;
};

/// FNV-1a over arbitrary bytes, used to fingerprint configurations.
std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& text);

}  // namespace ucrl
