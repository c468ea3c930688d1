#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace shfl {

using ClientId = int;
using EdgeId = int;

inline constexpr EdgeId kNoEdge = -1;

/// Raised for malformed or out-of-range configuration. `key()` names the
/// offending configuration key when one is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Input outside a function's mathematical domain (zero reference mass,
/// zero feature vector, empty shard...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Problem too large for an exhaustive routine.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// No feasible starting point could be produced within the attempt budget.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix, enough for per-(client, edge) tables.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<T>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

}  // namespace shfl
