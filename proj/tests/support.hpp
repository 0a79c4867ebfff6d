#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tats/core.hpp"

namespace tats::testing {

inline std::filesystem::path source_dir() { return TATS_SOURCE_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("tats_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Gaussian random walk with no zero steps.
inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double start = 50.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> y{start};
    while (y.size() < n) {
        const double step = z(rng);
        if (step != 0.0) y.push_back(y.back() + step);
    }
    return y;
}

}  // namespace tats::testing
