#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace mobfl::csv {

/// 9 significant digits, '.' decimal separator regardless of locale.
/// Integral values keep a trailing ".0" so numeric columns stay typed as
/// reals ("1.0", not "1").
std::string format_number(double value);

/// Accumulates RFC-4180-style rows in memory; fields here never need quoting.
class Table {
 public:
  explicit Table(std::initializer_list<std::string_view> header);

  Table& add_row(std::initializer_list<std::string> fields);
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::size_t columns_;
};

/// Write to `path` through a temporary sibling and rename.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mobfl::csv
