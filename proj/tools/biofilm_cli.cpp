#include "biofilm/cli.hpp"

int main(int argc, char **argv) { return biofilm::cli::run_cli(argc, argv); }
