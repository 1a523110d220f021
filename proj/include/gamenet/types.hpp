#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gamenet {

// Opaque identifiers. Ids carry no ordering meaning beyond determinism.
enum class PlayerId : std::uint64_t {};
enum class GameId : std::uint64_t {};

constexpr std::uint64_t raw(PlayerId id) { return static_cast<std::uint64_t>(id); }
constexpr std::uint64_t raw(GameId id) { return static_cast<std::uint64_t>(id); }

inline std::string to_string(PlayerId id) { return std::to_string(raw(id)); }
inline std::string to_string(GameId id) { return std::to_string(raw(id)); }

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Provider/network failure that survived all retries (exit code 3).
class TransientError : public Error {
 public:
  using Error::Error;
};

// Bad invocation or configuration (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace gamenet
