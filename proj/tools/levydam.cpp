#include "levydam/cli/commands.hpp"

int main(int argc, char** argv) { return levydam::cli::run(argc, argv); }
