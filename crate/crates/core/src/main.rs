use std::io;

/// Deep inputs recurse in the parser and interpreter.
const MAIN_STACK: usize = 256 << 20;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let code = std::thread::Builder::new()
        .stack_size(MAIN_STACK)
        .spawn(move || cogniview::cli::run_cli(&argv, &mut io::stdout().lock(), &mut io::stderr().lock()))
        .expect("spawn main thread")
        .join()
        .unwrap_or(1);
    std::process::exit(code);
}
