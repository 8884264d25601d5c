#include "formhom/parallel.hpp"

#include <cstdlib>
#include <string>

namespace formhom {

int defaultThreads() {
  if (const char* e = std::getenv("FORMHOM_THREADS")) {
    try {
      int n = std::stoi(e);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace formhom
