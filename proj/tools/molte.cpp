#include "molte/cli.hpp"

int main(int argc, char** argv) { return molte::run_cli(argc, argv); }
