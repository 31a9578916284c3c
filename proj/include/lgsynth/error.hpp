#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lgsynth {

/// Failure categories raised while building or reducing a linear graph model.
enum class ErrorCode {
    LengthMismatch,
    InvalidCode,
    UnpairedTwoPort,
    Disconnected,
    SelfLoop,
    NodeOutOfRange,
    NonPositiveParameter,
    BadOutputSpec,
    SourceLoop,
    SourceCutset,
    DependentStorage,
    SingularReduction,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidCode: return "InvalidCode";
    case ErrorCode::UnpairedTwoPort: return "UnpairedTwoPort";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::BadOutputSpec: return "BadOutputSpec";
    case ErrorCode::SourceLoop: return "SourceLoop";
    case ErrorCode::SourceCutset: return "SourceCutset";
    case ErrorCode::DependentStorage: return "DependentStorage";
    case ErrorCode::SingularReduction: return "SingularReduction";
    }
    return "Unknown";
}

class ModelError : public std::runtime_error {
public:
    ModelError(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the time integrator when the state leaves the finite range.
class NonFiniteState : public std::runtime_error {
public:
    explicit NonFiniteState(std::size_t last_valid_step)
        : std::runtime_error("NonFiniteState: state diverged after step " + std::to_string(last_valid_step)),
          last_valid_step_(last_valid_step) {}

    [[nodiscard]] std::size_t last_valid_step() const noexcept { return last_valid_step_; }

private:
    std::size_t last_valid_step_;
};

}  // namespace lgsynth
