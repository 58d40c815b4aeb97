// Acceptance suite: assembled after all modules are in place.
int main() { return 0; }
