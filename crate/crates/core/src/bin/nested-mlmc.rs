fn main() {
    let code = nested_mlmc::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
