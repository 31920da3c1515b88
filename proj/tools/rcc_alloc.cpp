#include "rcc/cli.hpp"

int main(int argc, char** argv) { return rcc::cli::run(argc, argv); }
