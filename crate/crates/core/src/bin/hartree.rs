fn main() {
    std::process::exit(hartree_core::cli::main());
}
