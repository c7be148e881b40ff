#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "contourlab/nets.hpp"
#include "contourlab/replay.hpp"
#include "contourlab/scenario.hpp"

namespace contourlab {

class BinaryWriter;
class BinaryReader;

struct DdpgConfig {
  std::size_t hidden = 256;
  double gamma = 0.95;
  double actor_lr = 3e-3;
  double critic_lr = 1e-3;
  double tau = 0.005;
  double momentum = 0.9;
  double noise_sigma = 0.2;   // radians, initial exploration std
  double noise_decay = 0.999; // per episode
  std::size_t batch_size = 128;
  std::size_t buffer_capacity = 100000;

  void validate() const;
};

void to_json(nlohmann::json& j, const DdpgConfig& c);
void from_json(const nlohmann::json& j, DdpgConfig& c);

/// Network input for one observation. Own position and velocity stay in the
/// world frame, scaled by the arena size and the UAV speed. The swarm row is
/// relative to the UAV and rotated into its heading frame. Each visible
/// obstacle row holds the heading-frame bearing unit vector and the relative
/// velocity over the UAV speed, both multiplied by (1 - distance / sense_range).
/// Masked rows stay zero. Length is `config.observation_dim()`.
Eigen::VectorXd encode_observation(const Observation& obs, const ScenarioConfig& config);

/// pi(o) plus N(0, noise_scale^2) exploration, clamped to [-pi/4, pi/4].
/// noise_scale == 0 draws nothing from `rng`. Throws NumericError on a non-finite input.
Action act(const PolicyNet& policy, const Eigen::VectorXd& obs, double noise_scale, std::mt19937_64& rng);

/// y = r + gamma (1 - done) Q'(o', pi'(o')).
Eigen::RowVectorXd td_targets(const Batch& batch, const PolicyNet& target_policy, const ValueNet& target_value,
                              double gamma);

struct ValueLoss {
  double loss = 0.0;  // mean (y - Q(o, a))^2
  ValueNet grad;
};
ValueLoss value_loss_gradient(const ValueNet& value, const Batch& batch, const Eigen::RowVectorXd& targets);

/// One descent step on the mean squared TD error; returns the pre-step loss.
/// Throws NumericError if the loss is not finite (parameters untouched).
double update_value(ValueNet& value, Momentum<ValueNet>& optimizer, const Batch& batch,
                    const Eigen::RowVectorXd& targets, double lr);

struct PolicyObjective {
  double objective = 0.0;  // mean Q(o, pi(o))
  PolicyNet grad;          // d objective / d theta
};
PolicyObjective policy_objective_gradient(const PolicyNet& policy, const ValueNet& value, const Eigen::MatrixXd& obs);

/// One ascent step on mean Q(o, pi(o)) with the value net frozen; returns the
/// pre-step objective. Throws NumericError if it is not finite.
double update_policy(PolicyNet& policy, Momentum<PolicyNet>& optimizer, const ValueNet& value, const Batch& batch,
                     double lr);

struct LearnStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

/// One independent learner: its own actor, critic, target copies, optimizer
/// state, replay buffer and random stream. Agents never share parameters.
class DdpgAgent {
 public:
  DdpgAgent() = default;
  DdpgAgent(std::size_t obs_dim, const DdpgConfig& config, std::uint64_t seed);

  Action act(const Eigen::VectorXd& obs, bool explore);
  double q_value(const Eigen::VectorXd& obs, double action) const;
  void remember(const Eigen::VectorXd& obs, double action, double reward, const Eigen::VectorXd& next_obs, bool done);
  /// Sample a batch, update critic then actor, then soft-update both targets.
  LearnStats learn();
  void end_episode() { noise_scale_ *= config_.noise_decay; }

  const DdpgConfig& config() const { return config_; }
  DdpgConfig& mutable_config() { return config_; }
  const PolicyNet& actor() const { return actor_; }
  const ValueNet& critic() const { return critic_; }
  const PolicyNet& target_actor() const { return target_actor_; }
  const ValueNet& target_critic() const { return target_critic_; }
  PolicyNet& actor() { return actor_; }
  ValueNet& critic() { return critic_; }
  const ReplayBuffer& replay() const { return replay_; }
  double noise_scale() const { return noise_scale_; }
  void set_noise_scale(double s) { noise_scale_ = s; }
  std::size_t obs_dim() const { return actor_.obs_dim(); }

  void save(BinaryWriter& out) const;
  static DdpgAgent load(BinaryReader& in);

  /// Bitwise equality of every parameter, optimizer slot, replay entry and RNG state.
  bool identical(const DdpgAgent& other) const;

 private:
  DdpgConfig config_;
  PolicyNet actor_, target_actor_;
  ValueNet critic_, target_critic_;
  Momentum<PolicyNet> actor_opt_;
  Momentum<ValueNet> critic_opt_;
  ReplayBuffer replay_;
  std::mt19937_64 rng_;
  double noise_scale_ = 0.0;
};

}  // namespace contourlab
