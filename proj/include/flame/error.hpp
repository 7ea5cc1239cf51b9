#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <utility>

namespace flame {

/// Base of every error raised by the toolkit. `code()` is the stable
/// machine-readable name surfaced by the CLI and the HTTP service.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(message), code_(std::move(code)), details_(std::move(details)) {}

    const std::string& code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

    nlohmann::json to_json() const {
        return {{"code", code_}, {"message", what()}, {"details", details_}};
    }

private:
    std::string code_;
    nlohmann::json details_;
};

#define FLAME_DEFINE_ERROR(Name)                                                          \
    class Name : public Error {                                                           \
    public:                                                                               \
        explicit Name(const std::string& message,                                         \
                      nlohmann::json details = nlohmann::json::object())                  \
            : Error(#Name, message, std::move(details)) {}                                \
    }

FLAME_DEFINE_ERROR(DimensionError);
FLAME_DEFINE_ERROR(DegenerateVectorError);
FLAME_DEFINE_ERROR(ConfigError);
FLAME_DEFINE_ERROR(EmptyPoolError);
FLAME_DEFINE_ERROR(InsufficientSamplesError);
FLAME_DEFINE_ERROR(EmptyBandError);
FLAME_DEFINE_ERROR(SingleClassError);
FLAME_DEFINE_ERROR(ConvergenceError);
FLAME_DEFINE_ERROR(DivergenceError);
FLAME_DEFINE_ERROR(NotSeparableError);
FLAME_DEFINE_ERROR(UnknownShotError);
FLAME_DEFINE_ERROR(FormatError);
FLAME_DEFINE_ERROR(ParseError);
FLAME_DEFINE_ERROR(NoPositivesError);
FLAME_DEFINE_ERROR(AnnotationIncompleteError);
FLAME_DEFINE_ERROR(PhaseError);
FLAME_DEFINE_ERROR(IoError);
FLAME_DEFINE_ERROR(NotFoundError);

#undef FLAME_DEFINE_ERROR

/// Errors that stem from user input rather than runtime failures
/// (CLI exit code 2, HTTP 400/422 family).
inline bool is_usage_error(const Error& e) {
    const auto& c = e.code();
    return c == "ConfigError" || c == "InsufficientSamplesError" || c == "DimensionError" ||
           c == "FormatError" || c == "ParseError" || c == "UnknownShotError";
}

}  // namespace flame
