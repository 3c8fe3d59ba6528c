#include "hmindex/cli.hpp"

int main(int argc, char** argv) { return hmindex::run_cli(argc, argv); }
