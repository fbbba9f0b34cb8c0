#include "tcg/cli.hpp"

int main(int argc, char** argv) { return tcg::run_cli(argc, argv); }
