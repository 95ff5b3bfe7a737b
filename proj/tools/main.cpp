#include "hambvp/cli.hpp"

int main(int argc, char** argv) { return hambvp::cli_main(argc, argv); }
