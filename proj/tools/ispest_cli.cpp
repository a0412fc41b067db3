#include "ispest/cli.hpp"

int main(int argc, char** argv) { return ispest::cli_main(argc, argv); }
