#include "fixtures.hpp"

#include <random>

namespace vlt::testing {

std::filesystem::path scratch_dir(const std::string& tag) {
    std::random_device rd;
    auto dir = std::filesystem::temp_directory_path() / ("vlt-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace vlt::testing
