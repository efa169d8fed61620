#include "ssbm/cli.hpp"

int main(int argc, char** argv) { return ssbm::run_cli(argc, argv); }
