#include "flame/cli/cli.hpp"

int main(int argc, char** argv) { return flame::cli::main(argc, argv); }
