#ifndef CTRW_VERSION_HPP
#define CTRW_VERSION_HPP

namespace ctrw {

inline constexpr const char* version_string = "0.1.0";

}

#endif
