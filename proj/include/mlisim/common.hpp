#pragma once

#include <stdexcept>
#include <string>

namespace mlisim {

/// Inverter operating mode: two-level or three-level output voltage.
enum class LevelMode { L2, L3 };

inline const char* to_string(LevelMode m) { return m == LevelMode::L2 ? "2L" : "3L"; }

// Error categories map to CLI exit codes (config=2, infeasible=3, data=4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mlisim
