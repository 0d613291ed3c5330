#include "cli.hpp"

int main(int argc, char** argv) { return pwltc::cli::dispatch(argc, argv); }
