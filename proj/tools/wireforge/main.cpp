#include "wireforge/app/commands.hpp"

int main(int argc, char** argv) { return wireforge::app::main_entry(argc, argv); }
