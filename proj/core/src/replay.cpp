#include "contourlab/replay.hpp"

#include <algorithm>
#include <vector>

#include <fmt/format.h>

#include "contourlab/errors.hpp"

namespace contourlab {

ReplayBuffer::ReplayBuffer(std::size_t obs_dim, std::size_t capacity)
    : capacity_(capacity),
      obs_(static_cast<Eigen::Index>(obs_dim), static_cast<Eigen::Index>(capacity)),
      next_obs_(static_cast<Eigen::Index>(obs_dim), static_cast<Eigen::Index>(capacity)),
      actions_(static_cast<Eigen::Index>(capacity)),
      rewards_(static_cast<Eigen::Index>(capacity)),
      done_(static_cast<Eigen::Index>(capacity)) {
  if (capacity == 0) throw InvalidArgument("replay capacity must be positive");
  obs_.setZero();
  next_obs_.setZero();
  actions_.setZero();
  rewards_.setZero();
  done_.setZero();
}

void ReplayBuffer::push(const Eigen::VectorXd& obs, double action, double reward, const Eigen::VectorXd& next_obs,
                        bool done) {
  if (obs.size() != obs_.rows() || next_obs.size() != obs_.rows()) {
    throw InvalidArgument(fmt::format("replay: observation size {} != {}", obs.size(), obs_.rows()));
  }
  const auto c = static_cast<Eigen::Index>(cursor_);
  obs_.col(c) = obs;
  next_obs_.col(c) = next_obs;
  actions_[c] = action;
  rewards_[c] = reward;
  done_[c] = done ? 1.0 : 0.0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& slots) const {
  const auto b = static_cast<Eigen::Index>(slots.size());
  Batch out;
  out.obs.resize(obs_.rows(), b);
  out.next_obs.resize(obs_.rows(), b);
  out.actions.resize(b);
  out.rewards.resize(b);
  out.done.resize(b);
  for (Eigen::Index k = 0; k < b; ++k) {
    const auto s = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(k)]);
    out.obs.col(k) = obs_.col(s);
    out.next_obs.col(k) = next_obs_.col(s);
    out.actions[k] = actions_[s];
    out.rewards[k] = rewards_[s];
    out.done[k] = done_[s];
  }
  return out;
}

Batch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  if (batch_size == 0 || batch_size > size_) {
    throw InvalidArgument(fmt::format("replay: cannot sample {} of {} transitions", batch_size, size_));
  }
  // Floyd's algorithm: distinct indices without materializing a permutation.
  std::vector<std::size_t> slots;
  slots.reserve(batch_size);
  for (std::size_t j = size_ - batch_size; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    if (std::find(slots.begin(), slots.end(), t) == slots.end()) {
      slots.push_back(t);
    } else {
      slots.push_back(j);
    }
  }
  return gather(slots);
}

Batch ReplayBuffer::at(std::size_t slot) const {
  if (slot >= size_) throw InvalidArgument("replay slot out of range");
  return gather({slot});
}

void ReplayBuffer::restore_cursor(std::size_t size, std::size_t cursor) {
  if (size > capacity_ || cursor >= capacity_) throw FormatError("replay cursor out of range");
  size_ = size;
  cursor_ = cursor;
}

}  // namespace contourlab
