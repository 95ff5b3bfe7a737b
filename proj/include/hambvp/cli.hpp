#pragma once

namespace hambvp {

/// Entry point of the command-line front end.
int cli_main(int argc, char** argv);

}  // namespace hambvp
