#include "graspda/cli.hpp"

int main(int argc, char** argv) { return graspda::cli::main(argc, argv); }
