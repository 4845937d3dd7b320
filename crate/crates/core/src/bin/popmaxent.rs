fn main() {
    let outcome = popmaxent::cli::run_from_args(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(outcome.exit_code);
}
