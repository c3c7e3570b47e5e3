#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace polygate {

/// Precondition or invariant violation on caller-supplied values.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File missing, unreadable, or not decodable.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grammar violation in a text file; carries the offending location.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

/// Aggregate of per-item failures; thrown instead of returning partial results.
class IngestError : public std::runtime_error {
 public:
  explicit IngestError(std::vector<std::string> items)
      : std::runtime_error(join(items)), items_(std::move(items)) {}

  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = std::to_string(items.size()) + " ingestion error(s)";
    for (const auto& item : items) out += "\n  " + item;
    return out;
  }

  std::vector<std::string> items_;
};

}  // namespace polygate
