#pragma once

#include <stdexcept>
#include <string>

namespace gbsk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or label file. Carries the 1-based row when known.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t row)
        : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

  private:
    std::size_t row_;
};

/// Parameter outside its documented domain.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// The pipeline produced fewer balls than the requested cluster count.
class InsufficientBalls : public Error {
  public:
    InsufficientBalls(const std::string& stage, std::size_t available, std::size_t k)
        : Error("insufficient " + stage + " (" + std::to_string(available) + " < k=" +
                std::to_string(k) + "); raise s, alpha or M"),
          available_(available),
          k_(k) {}

    std::size_t available() const noexcept { return available_; }
    std::size_t k() const noexcept { return k_; }

  private:
    std::size_t available_;
    std::size_t k_;
};

} // namespace gbsk
