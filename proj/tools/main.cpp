#include "commands.hpp"

int main(int argc, char** argv) { return impulse_game::cli::run(argc, argv); }
