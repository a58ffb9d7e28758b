use std::io::Write;

// Terms grow one level per step in some divergent systems, and term
// traversals recurse, so a full fuel budget needs a deep stack.
const STACK_BYTES: usize = 1 << 30;

fn main() {
    let (code, text) = std::thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(|| lmtk::run(std::env::args_os()))
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|_| (lmtk::EXIT_INPUT, "error: internal failure\n".to_string()));
    let _ = if code == lmtk::EXIT_INPUT {
        std::io::stderr().lock().write_all(text.as_bytes())
    } else {
        std::io::stdout().lock().write_all(text.as_bytes())
    };
    std::process::exit(code);
}
