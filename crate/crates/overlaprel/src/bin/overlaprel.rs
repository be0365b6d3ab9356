use clap::Parser;

use overlaprel::cli::{run, Cli};

fn main() {
    // OVERLAPREL_THREADS caps internal parallelism; output is identical
    // regardless of the setting.
    if let Ok(threads) = std::env::var("OVERLAPREL_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("warning: ignoring invalid OVERLAPREL_THREADS={threads}");
            }
        }
    }
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
