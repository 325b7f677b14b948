#include "curvlab/cli.hpp"
#include "default_config.hpp"

int main(int argc, char** argv) { return curvlab::cli::run_cli(argc, argv, kDefaultConfig); }
