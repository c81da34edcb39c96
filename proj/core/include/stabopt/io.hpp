#ifndef STABOPT_IO_HPP
#define STABOPT_IO_HPP

#include <cstdio>
#include <string>

namespace stabopt {

// All numeric output goes through one formatter so repeated runs are
// byte-identical. 17 significant digits round-trips a double.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace stabopt

#endif
