#ifndef PREFFORGE_ERRORS_HPP_
#define PREFFORGE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace prefforge {

// Base class for all data/contract errors raised by the library.
// The CLI maps these to exit code 1; usage problems map to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A line-addressable problem in an input file.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

}  // namespace prefforge

#endif  // PREFFORGE_ERRORS_HPP_
