#include "hilbertpower/cli.hpp"

int main(int argc, char** argv) { return hilbertpower::cli::run_cli(argc, argv); }
