fn main() {
    std::process::exit(texmath_service::cli::main());
}
