#include "emojipred/cli.hpp"

int main(int argc, char** argv) { return emojipred::cli::main(argc, argv); }
