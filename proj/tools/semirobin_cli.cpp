#include "semirobin/cli.hpp"

int main(int argc, char** argv) { return semirobin::dispatch(argc, argv); }
