#pragma once

#include <memory>
#include <string>

#include "kernel/rng.hpp"

namespace hare {

class Simulation;

/// Scripted regulator. Acts at its cadence through Simulation::submit, the
/// same path human commands take.
class Policy {
public:
    virtual ~Policy() = default;
    virtual void act(Simulation& sim, SeededRng& rng) = 0;
};

/// nullptr for "none". Throws std::invalid_argument for unknown names.
std::unique_ptr<Policy> make_policy(const std::string& name);

}  // namespace hare
