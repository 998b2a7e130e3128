#include "lqrt/cli.hpp"

int main(int argc, char** argv) { return lqrt::cli::main(argc, argv); }
