#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace topothresh {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based; 0 when the problem is not tied to a line.
class parse_error : public error {
public:
    parse_error(std::string file, std::size_t line, const std::string& what)
        : error(file + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Edge weights are undefined when the corpus spans a single year.
class degenerate_range_error : public error {
public:
    using error::error;
};

/// A filtration or boundary matrix violates its ordering contract.
class consistency_error : public error {
public:
    using error::error;
};

/// Wraps a failure raised while populating one grid cell.
class cell_error : public error {
public:
    cell_error(std::vector<std::size_t> index, std::vector<double> coords, const std::string& what)
        : error(describe(index, coords) + ": " + what),
          index_(std::move(index)), coords_(std::move(coords)) {}

    const std::vector<std::size_t>& index() const noexcept { return index_; }
    const std::vector<double>& coords() const noexcept { return coords_; }

private:
    static std::string describe(const std::vector<std::size_t>& index,
                                const std::vector<double>& coords) {
        std::string s = "cell (";
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(index[i]);
        }
        s += ") at (";
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(coords[i]);
        }
        return s + ")";
    }

    std::vector<std::size_t> index_;
    std::vector<double> coords_;
};

/// No grid cell satisfies the feature-count constraints.
class infeasible_error : public error {
public:
    infeasible_error(std::vector<std::size_t> binding, std::vector<double> deltas,
                     std::vector<std::size_t> maxima)
        : error(describe(binding, deltas, maxima)),
          binding_(std::move(binding)), deltas_(std::move(deltas)), maxima_(std::move(maxima)) {}

    /// Homology dimensions (1-based k) whose constraint cannot be met.
    const std::vector<std::size_t>& binding() const noexcept { return binding_; }
    const std::vector<double>& deltas() const noexcept { return deltas_; }
    const std::vector<std::size_t>& maxima() const noexcept { return maxima_; }

private:
    static std::string describe(const std::vector<std::size_t>& binding,
                                const std::vector<double>& deltas,
                                const std::vector<std::size_t>& maxima) {
        std::string s = "no feasible cell; binding constraints:";
        for (auto k : binding) {
            s += " delta_" + std::to_string(k) + "=" + std::to_string(deltas[k - 1]) +
                 " (F_" + std::to_string(k) + "=" + std::to_string(maxima[k - 1]) + ")";
        }
        return s;
    }

    std::vector<std::size_t> binding_;
    std::vector<double> deltas_;
    std::vector<std::size_t> maxima_;
};

}  // namespace topothresh
