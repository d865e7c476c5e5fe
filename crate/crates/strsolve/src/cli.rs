//! Command-line interface (placeholder while the engine lands).

pub fn main_with_args(_args: Vec<String>) -> i32 {
    eprintln!("strsolve: engine not wired up yet");
    1
}
