#include "gantab/cli.hpp"

int main(int argc, char** argv) { return gantab::cli_main(argc, argv); }
