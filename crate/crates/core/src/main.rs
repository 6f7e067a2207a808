use std::io::Write;

fn main() {
    let mut out = std::io::stdout().lock();
    let code = ringspectra::cli::main_with_args(std::env::args_os(), &mut out, &mut std::io::stderr());
    let _ = out.flush();
    std::process::exit(code);
}
