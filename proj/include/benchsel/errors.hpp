#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace benchsel {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 1.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based row/column where parsing failed
/// (0 when not applicable).
class schema_error : public error {
public:
    schema_error(const std::string& what, std::size_t row, std::size_t column)
        : error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row),
          column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class validation_error : public error {
public:
    using error::error;
};

class lookup_error : public error {
public:
    using error::error;
};

class degenerate_dataset_error : public error {
public:
    using error::error;
};

class missing_input_error : public error {
public:
    using error::error;
};

/// Rank-deficient design. `column()` is the index of the first column whose
/// pivot fell below the relative threshold.
class singular_matrix_error : public error {
public:
    singular_matrix_error(const std::string& what, std::size_t column)
        : error(what), column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class empty_search_error : public error {
public:
    using error::error;
};

class undefined_value_error : public error {
public:
    using error::error;
};

}  // namespace benchsel
