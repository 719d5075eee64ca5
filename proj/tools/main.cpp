#include "semchain/cli.hpp"

int main(int argc, char** argv) { return semchain::run_cli(argc, argv); }
