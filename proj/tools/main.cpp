#include "commands.hpp"

int main(int argc, char** argv) { return dagma::cli::run(argc, argv); }
