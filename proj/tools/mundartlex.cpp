#include "mundartlex/cli.hpp"

int main(int argc, char** argv) { return mundartlex::run_cli(argc, argv); }
