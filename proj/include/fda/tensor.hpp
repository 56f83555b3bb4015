#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fda {

// All numeric state is double precision; gradient checking depends on it.
using Vec = std::vector<double>;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Row-major dense matrix. Vectors that live inside ParamGroups are stored
// as n x 1 matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {
        if (r == 0 || c == 0) throw Error("Matrix dimensions must be positive");
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    Vec row(std::size_t r) const {
        return Vec(row_ptr(r), row_ptr(r) + cols);
    }

    std::size_t size() const { return data.size(); }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

// One named block of trainable (or frozen) weights with its gradient
// accumulator. Gradient shape always mirrors the value shape.
struct ParamGroup {
    std::string name;
    Matrix value;
    Matrix grad;
    bool trainable = true;

    ParamGroup() = default;
    ParamGroup(std::string n, std::size_t r, std::size_t c, bool train = true)
        : name(std::move(n)), value(r, c), grad(r, c), trainable(train) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

inline std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace fda
