#include "kpad/cli.hpp"

int main(int argc, char** argv) { return kpad::run_cli(argc, argv); }
