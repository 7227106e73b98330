#pragma once

#include <sstream>
#include <string>

namespace resdim::detail {

// Shortest decimal text within 6 significant digits; shared by every
// delimited-report writer so identical runs emit byte-identical artifacts.
inline std::string format_number(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace resdim::detail
