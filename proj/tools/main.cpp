#include "app.hpp"

int main(int argc, char** argv) { return rampo::app::main(argc, argv); }
