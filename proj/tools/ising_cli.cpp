#include "ising/cli.hpp"

int main(int argc, char** argv) { return ising::cli::main(argc, argv); }
