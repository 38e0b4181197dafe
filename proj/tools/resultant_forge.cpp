#include "rforge/cli.hpp"

int main(int argc, char** argv) { return rforge::run_cli(argc, argv); }
