#include "sasoftmax/cli.hpp"

int main(int argc, char** argv) { return sasoftmax::cli::run(argc, argv); }
