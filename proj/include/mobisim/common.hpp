#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace mobisim {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Raised for invalid configuration (scenario files, presets, CLI overrides).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an internal contract is violated (engine misuse, inconsistent
/// link events). These indicate bugs, not bad input.
class SimError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mobisim
