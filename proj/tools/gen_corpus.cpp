#include <iostream>

int main() {
    std::cerr << "cpgrules-gen-corpus: not wired up yet\n";
    return 2;
}
