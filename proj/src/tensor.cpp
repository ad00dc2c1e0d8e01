#include "pdpha/tensor.hpp"

#include <cmath>
#include <sstream>

namespace pdpha {

std::string shape_str(const Tensor& t) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < t.shape.size(); ++i) {
        if (i) os << ",";
        os << t.shape[i];
    }
    os << ")";
    return os.str();
}

void check_finite(const Tensor& t, const char* op) {
    for (double x : t.v) {
        if (!std::isfinite(x)) {
            throw std::runtime_error(std::string("non-finite value produced by op '") + op + "'");
        }
    }
}

}  // namespace pdpha
