#include "mfy/cli.hpp"

int main(int argc, char** argv) { return mfy::cli::run(argc, argv); }
