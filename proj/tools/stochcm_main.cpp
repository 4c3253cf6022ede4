#include "stochcm/cli.hpp"

int main(int argc, char** argv) { return stochcm::run_cli(argc, argv); }
