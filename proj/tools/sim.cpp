#include "cli.hpp"

int main(int argc, char** argv) { return runaway::cli::main(argc, argv); }
