#include "splitkit/fixedpoint.hpp"

#include <cstdio>

namespace splitkit {

std::string QFormat::to_string() const {
    return "Q" + std::to_string(int_bits) + "." + std::to_string(frac_bits);
}

QFormat QFormat::parse(const std::string& s, Overflow o, Quantize q) {
    int ib = 0, fb = 0;
    char trail = 0;
    if (std::sscanf(s.c_str(), "Q%d.%d%c", &ib, &fb, &trail) != 2 &&
        std::sscanf(s.c_str(), "q%d.%d%c", &ib, &fb, &trail) != 2)
        throw std::invalid_argument("QFormat: expected \"Q<int_bits>.<frac_bits>\", got \"" + s + "\"");
    return QFormat(ib, fb, o, q);
}

}  // namespace splitkit
