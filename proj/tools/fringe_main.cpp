#include "commands.hpp"

int main(int argc, char** argv) { return fringe::cli::run(argc, argv); }
