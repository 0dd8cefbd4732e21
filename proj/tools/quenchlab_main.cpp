#include "quenchlab/cli.hpp"

int main(int argc, char** argv) { return quenchlab::run_cli(argc, argv); }
