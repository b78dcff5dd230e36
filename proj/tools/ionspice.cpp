#include "ionspice/cli.hpp"

int main(int argc, char** argv) { return ionspice::cli::main(argc, argv); }
