#include "hambvp/cli.hpp"

#include <cstdio>

namespace hambvp {

int cli_main(int, char**) {
  std::printf("hambvp: command layer under construction\n");
  return 1;
}

}  // namespace hambvp
