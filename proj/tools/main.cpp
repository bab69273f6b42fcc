#include "commands.hpp"

int main(int argc, char** argv) { return tanglekit_cli_main(argc, argv); }
