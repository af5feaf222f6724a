fn main() {
    std::process::exit(adelic_gabor::cli::main_from_env());
}
