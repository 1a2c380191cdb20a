#include "lelong/cli.hpp"

int main(int argc, char** argv) { return lelong::run_command(argc, argv); }
