#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hgec {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (empty corpus, bad fraction, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Whole-file format failure (the file is not in the declared format at all).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Judge reply contained no JSON array of codes.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Judge reply named a code outside the taxonomy.
class UnknownCode : public Error {
 public:
  explicit UnknownCode(std::string token)
      : Error("unknown error code: '" + token + "'"), token_(std::move(token)) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class InputTooLong : public Error {
 public:
  InputTooLong(std::size_t tokens, std::size_t limit)
      : Error("input has " + std::to_string(tokens) + " tokens, limit is " +
              std::to_string(limit)),
        tokens_(tokens),
        limit_(limit) {}
  std::size_t tokens() const noexcept { return tokens_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t tokens_;
  std::size_t limit_;
};

/// Remote engine could not produce an answer after all retries.
class EngineUnavailable : public Error {
 public:
  using Error::Error;
};

/// The last failed attempt was a timeout.
class EngineTimeout : public EngineUnavailable {
 public:
  using EngineUnavailable::EngineUnavailable;
};

/// Every item of a batch failed.
class BatchFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace hgec
