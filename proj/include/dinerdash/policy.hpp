#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "dinerdash/env.hpp"

namespace dinerdash {

// Anything that can drive an Env. Instances are single-threaded; evaluation
// fans out by cloning.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Called once per episode with the episode seed, before the first act().
  virtual void begin_episode(uint64_t seed) { (void)seed; }
  virtual int act(const Env& env) = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
};

}  // namespace dinerdash
