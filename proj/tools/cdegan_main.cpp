#include "cdegan/cli.hpp"

int main(int argc, char** argv) { return cdegan::run_cli(argc, argv); }
