#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace contourlab {

/// Column batch of transitions (o, a, r, o', done).
struct Batch {
  Eigen::MatrixXd obs;       // obs_dim x B
  Eigen::RowVectorXd actions;
  Eigen::RowVectorXd rewards;
  Eigen::MatrixXd next_obs;  // obs_dim x B
  Eigen::RowVectorXd done;   // 1 for terminal transitions (no bootstrap)

  std::size_t size() const { return static_cast<std::size_t>(obs.cols()); }
};

/// Fixed-capacity ring buffer; once full, each insertion overwrites the oldest entry.
class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  ReplayBuffer(std::size_t obs_dim, std::size_t capacity);

  void push(const Eigen::VectorXd& obs, double action, double reward, const Eigen::VectorXd& next_obs, bool done);

  /// Uniform sample of `batch_size` distinct stored transitions.
  /// Throws InvalidArgument if fewer are stored.
  Batch sample(std::size_t batch_size, std::mt19937_64& rng) const;

  /// The transition in storage slot `slot` (0 <= slot < size()).
  Batch at(std::size_t slot) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t obs_dim() const { return static_cast<std::size_t>(obs_.rows()); }
  std::size_t cursor() const { return cursor_; }

  // Raw storage, for checkpointing.
  Eigen::MatrixXd& obs_storage() { return obs_; }
  Eigen::MatrixXd& next_obs_storage() { return next_obs_; }
  Eigen::RowVectorXd& action_storage() { return actions_; }
  Eigen::RowVectorXd& reward_storage() { return rewards_; }
  Eigen::RowVectorXd& done_storage() { return done_; }
  const Eigen::MatrixXd& obs_storage() const { return obs_; }
  const Eigen::MatrixXd& next_obs_storage() const { return next_obs_; }
  const Eigen::RowVectorXd& action_storage() const { return actions_; }
  const Eigen::RowVectorXd& reward_storage() const { return rewards_; }
  const Eigen::RowVectorXd& done_storage() const { return done_; }
  void restore_cursor(std::size_t size, std::size_t cursor);

 private:
  Batch gather(const std::vector<std::size_t>& slots) const;

  std::size_t capacity_ = 0;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  Eigen::MatrixXd obs_;
  Eigen::MatrixXd next_obs_;
  Eigen::RowVectorXd actions_;
  Eigen::RowVectorXd rewards_;
  Eigen::RowVectorXd done_;
};

}  // namespace contourlab
