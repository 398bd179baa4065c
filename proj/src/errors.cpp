#include "nlslab/errors.hpp"

#include <iostream>
#include <mutex>

namespace nlslab {

void log_warning(const std::string& message) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::clog << "warning: " << message << '\n';
}

}  // namespace nlslab
