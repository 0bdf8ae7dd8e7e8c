#include "subco/cli.hpp"

int main(int argc, char** argv) { return subco::run_cli(argc, argv); }
