#include <iostream>

int main() {
    std::cerr << "cpgrules: not wired up yet\n";
    return 2;
}
